//! Special functions used by the outage analysis.

pub mod bessel;
pub mod gamma;
pub mod marcum;
pub mod meijer;

pub use bessel::{bessel_i0_scaled, bessel_i1_scaled, bessel_k, laguerre_half, ln_bessel_k};
pub use gamma::{
    digamma, gamma, gamma_p, gamma_q, ln_gamma, ln_gamma_complex, ln_gamma_signed, lower_incomplete_gamma, trigamma,
    upper_incomplete_gamma,
};
pub use marcum::{
    marcum_q1, marcum_q1_poly_approx, marcum_q1_poly_approx_with, marcum_q1_with_tol, MarcumPolyCoeffs, MarcumQ,
};
pub use meijer::{
    ln_meijer_g, meijer_contour, meijer_g_m0_0m, meijer_series, MeijerEstimate, MeijerGRestricted, MeijerMethod,
    MeijerOptions,
};
