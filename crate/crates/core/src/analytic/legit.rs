//! Gamma approximation of the cascaded user amplitude.

use serde::{Deserialize, Serialize};

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::special::{gamma_p, laguerre_half, ln_gamma};

/// Amplitude moments of a unit-power Rician variable with factor ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianAmplitude {
    /// L_{1/2}(−ε)
    pub laguerre: f64,
    /// E|h|
    pub mean: f64,
    /// Var|h| = 1 − E|h|²
    pub variance: f64,
}

impl RicianAmplitude {
    pub fn new(eps: f64) -> Result<Self> {
        let laguerre = laguerre_half(eps)?;
        let quarter_pi_l2 = std::f64::consts::FRAC_PI_4 * laguerre * laguerre;
        let mean = (std::f64::consts::PI.sqrt() / 2.0) * laguerre / (eps + 1.0).sqrt();
        let variance = (1.0 + eps - quarter_pi_l2) / (eps + 1.0);
        Ok(RicianAmplitude {
            laguerre,
            mean,
            variance,
        })
    }
}

/// γ_D = ρ_d·|A|² with |A| ~ Gamma(shape, scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegitSnrModel {
    pub gamma_shape: f64,
    pub gamma_scale: f64,
    pub rho_d: f64,
}

/// Moment-matched Gamma fit of |A| = √(Kν)·Σ|h_rd(n)|.
pub fn legit_model(cfg: &SystemConfig) -> Result<LegitSnrModel> {
    cfg.validate()?;
    let amp = RicianAmplitude::new(cfg.rician_eps)?;
    let n = cfg.n_ris as f64;
    let gain = (cfg.n_tx as f64 * cfg.nu() * cfg.mu_d()).sqrt();
    let mean = gain * n * amp.mean;
    let var = gain * gain * n * amp.variance;
    let model = LegitSnrModel {
        gamma_shape: mean * mean / var,
        gamma_scale: var / mean,
        rho_d: cfg.rho_d(),
    };
    if !(model.gamma_shape > 0.0 && model.gamma_scale > 0.0) || !model.gamma_scale.is_finite() {
        return Err(Error::domain("legit_model", format!("degenerate fit {model:?}")));
    }
    Ok(model)
}

impl LegitSnrModel {
    fn standardized(&self, x: f64) -> f64 {
        (x / self.rho_d).sqrt() / self.gamma_scale
    }

    /// Mean of γ_D under the fit: ρ_d·θ²·k(k+1).
    pub fn mean_snr(&self) -> f64 {
        self.rho_d * self.gamma_scale * self.gamma_scale * self.gamma_shape * (self.gamma_shape + 1.0)
    }
}

/// P(γ_D ≤ x); zero for x ≤ 0.
pub fn cdf_gamma_d(model: &LegitSnrModel, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("cdf_gamma_d", "x is NaN"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    gamma_p(model.gamma_shape, model.standardized(x))
}

/// Density of γ_D, evaluated in log space. Saturates at `f64::MAX` when the
/// density diverges at the origin (shape below 2).
pub fn pdf_gamma_d(model: &LegitSnrModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("pdf_gamma_d", format!("need x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let k = model.gamma_shape;
    let ln_u = 0.5 * (x.ln() - model.rho_d.ln()) - model.gamma_scale.ln();
    let ln_pdf = -ln_u.exp() + k * ln_u - std::f64::consts::LN_2 - ln_gamma(k) - x.ln();
    Ok(ln_pdf.exp().min(f64::MAX))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SystemConfig;
    use crate::quad::{integrate, QuadOptions};
    use std::f64::consts::PI;

    #[test]
    fn rayleigh_shape_constant() {
        let mut cfg = SystemConfig::fig3(16, 4);
        cfg.rician_eps = 0.0;
        let m = legit_model(&cfg).unwrap();
        let want = 16.0 * (PI / 4.0) / (1.0 - PI / 4.0);
        assert!((m.gamma_shape / want - 1.0).abs() < 1e-14);
        assert!((m.gamma_shape / 16.0 - 3.659792366325487).abs() < 1e-9);
    }

    #[test]
    fn matches_closed_parameter_expressions() {
        for &eps in &[0.0, 0.5, 2.0, 10.0] {
            let mut cfg = SystemConfig::fig3(64, 16);
            cfg.rician_eps = eps;
            let m = legit_model(&cfg).unwrap();
            let l = laguerre_half(eps).unwrap();
            let c = 1.0 + eps - (PI / 4.0) * l * l;
            let k = 64.0 * (PI / 4.0) * l * l / c;
            let theta = 16f64.sqrt() * (cfg.mu_d() * cfg.nu() / (eps + 1.0)).sqrt() * c / ((PI.sqrt() / 2.0) * l);
            assert!((m.gamma_shape / k - 1.0).abs() < 1e-13);
            assert!((m.gamma_scale / theta - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn shape_independent_of_transmit_antennas() {
        let a = legit_model(&SystemConfig::fig3(64, 4)).unwrap();
        let b = legit_model(&SystemConfig::fig3(64, 64)).unwrap();
        assert_eq!(a.gamma_shape, b.gamma_shape);
    }

    #[test]
    fn cdf_limits() {
        let m = legit_model(&SystemConfig::fig3(64, 16)).unwrap();
        assert_eq!(cdf_gamma_d(&m, 0.0).unwrap(), 0.0);
        let median = m.mean_snr();
        assert!((cdf_gamma_d(&m, 1e12 * median).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pdf_normalizes_and_matches_cdf_slope() {
        let m = legit_model(&SystemConfig::fig3(16, 4).with_rho_d_db(40.0)).unwrap();
        let s = m.mean_snr();
        let total = integrate(
            |x| pdf_gamma_d(&m, x).unwrap(),
            1e-12 * s,
            20.0 * s,
            QuadOptions::new(1e-14, 1e-10),
        )
        .unwrap()
        .value;
        assert!((total - 1.0).abs() < 1e-6, "{total}");

        let x = m.gamma_scale * m.gamma_scale * m.rho_d;
        let h = 1e-5 * x;
        let fd = (cdf_gamma_d(&m, x + h).unwrap() - cdf_gamma_d(&m, x - h).unwrap()) / (2.0 * h);
        let p = pdf_gamma_d(&m, x).unwrap();
        assert!((fd / p - 1.0).abs() < 1e-6, "{fd} vs {p}");
    }

    #[test]
    fn small_shape_density_at_origin_is_finite() {
        let m = LegitSnrModel {
            gamma_shape: 1.2,
            gamma_scale: 0.3,
            rho_d: 10.0,
        };
        let v = pdf_gamma_d(&m, 1e-300).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let m = LegitSnrModel {
            gamma_shape: 0.01,
            gamma_scale: 0.3,
            rho_d: 10.0,
        };
        assert_eq!(pdf_gamma_d(&m, 5e-324).unwrap(), f64::MAX);
        assert!(pdf_gamma_d(&m, 0.0).is_err());
    }
}
