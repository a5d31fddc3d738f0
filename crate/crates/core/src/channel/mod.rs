//! System configuration, array geometry and random channel draws.

mod array;
mod config;
mod sampling;

pub use array::{array_response, optimal_phase_shifts};
pub use config::{
    linear_to_db, Angles, AnglesDeg, ConfigFile, Direction, RationalExponent, SystemConfig, DEFAULT_BETA0,
};
pub use sampling::{
    complex_normal, evaluate_snrs, sample_ppp_disk, sample_rician_vector, snr_eve, snr_legit, AngleMode, Beamforming,
    ChannelRealization, EveSample,
};
