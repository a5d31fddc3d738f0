//! Distribution models for the user and eavesdropper SNRs.

mod eve;
mod legit;

pub use eve::{
    dirichlet_ratio, eve_aggregate_cdf_closed, eve_aggregate_cdf_closed_infinite, eve_aggregate_cdf_exact,
    eve_aggregate_pdf, eve_aggregate_pdf_direct, eve_aggregate_pdf_exact, eve_aggregate_pdf_infinite, eve_model,
    eve_model_with, eve_pointwise_cdf, rician_phase_coherence, EveCdfForm, EveSnrModel,
};
pub use legit::{cdf_gamma_d, legit_model, pdf_gamma_d, LegitSnrModel, RicianAmplitude};
