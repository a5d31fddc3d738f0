//! Secrecy outage analysis for a surface-assisted multi-antenna downlink with
//! Poisson-distributed eavesdroppers.
//!
//! The crate holds the channel simulator, the SNR distribution models, the
//! outage probability in integral, closed and asymptotic form, a Monte-Carlo
//! engine, and the oracle self-test suite.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::redundant_closure_call
)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod quad;
pub mod selftest;
pub mod sop;
pub mod special;

pub use analytic::{EveCdfForm, EveSnrModel, LegitSnrModel};
pub use channel::{AngleMode, ChannelRealization, ConfigFile, RationalExponent, SystemConfig};
pub use error::{Error, Result};
pub use montecarlo::{EmpiricalCdf, McPlan, McReport};
pub use sop::{OutageKernel, SopMethod, SopResult};
pub use special::{MarcumPolyCoeffs, MeijerGRestricted};
