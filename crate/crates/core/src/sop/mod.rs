//! Secrecy outage probability: quadrature, closed forms, asymptotics.

mod closed;
mod diversity;
mod quadrature;
mod result;

pub use closed::{
    alpha4_argument, closed_form_meijer, sop_alpha2_freespace, sop_alpha4_urban, sop_asymptotic, sop_asymptotic_raw,
    sop_closed, sop_closed_with, sop_two_term_expansion, ClosedOptions,
};
pub use diversity::diversity_order_estimate;
pub use quadrature::{sop_quadrature, sop_quadrature_forms, sop_quadrature_with, OutageKernel, QuadratureSop};
pub use result::{config_hash, SopMethod, SopResult};

#[cfg(test)]
mod tests;
