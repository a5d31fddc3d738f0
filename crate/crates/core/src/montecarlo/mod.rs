//! Monte-Carlo simulation of the full system.

mod ecdf;
mod engine;

pub use ecdf::{EmpiricalCdf, MIN_SAMPLES, QUANTILE_LEVELS};
pub use engine::{run_mc, sample_single_eve_snr, trial_rng, Collect, EmpiricalCdfs, McPlan, McReport};
