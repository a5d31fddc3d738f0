//! Eavesdropper SNR: per-position Marcum-Q law and the PPP aggregate of the
//! strongest eavesdropper.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::legit::RicianAmplitude;
use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::special::{bessel_i0_scaled, bessel_i1_scaled, gamma_p, ln_gamma, marcum_q1_with_tol, MarcumPolyCoeffs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveSnrModel {
    /// Normalized mean (first Marcum argument), common to all positions.
    pub varpi: f64,
    /// √x·r^{α₂/2}·xi is the second Marcum argument.
    pub xi: f64,
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// |E Z| at unit large-scale gain.
    pub mean_scale: f64,
    /// Var Z at unit large-scale gain.
    pub var_scale: f64,
    /// Surrogate exponent parameters evaluated at `varpi`.
    pub v: f64,
    pub mu: f64,
    pub eve_density: f64,
    pub eve_radius: f64,
    pub alpha2: f64,
}

/// sin(π·s·√N·δ)/sin(π·s·δ), with the removable singularities filled in.
pub fn dirichlet_ratio(delta: f64, sqrt_n: usize, spacing_ratio: f64) -> f64 {
    let m = sqrt_n as f64;
    let t = PI * spacing_ratio * delta;
    let s = t.sin();
    if s.abs() < 1e-8 {
        let n = (t / PI).round();
        let r = t - n * PI;
        let parity = (n as i64).rem_euclid(2) * (sqrt_n as i64 - 1).rem_euclid(2);
        let sign = if parity == 0 { 1.0 } else { -1.0 };
        sign * m * (1.0 - (m * m - 1.0) * r * r / 6.0)
    } else {
        (m * t).sin() / s
    }
}

/// |E e^{j∠h}| for a unit-power Rician h with factor ε, measured against the
/// line-of-sight phase: (√(πε)/2)·e^{−ε/2}[I₀(ε/2) + I₁(ε/2)].
pub fn rician_phase_coherence(eps: f64) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    0.5 * (PI * eps).sqrt() * (bessel_i0_scaled(0.5 * eps) + bessel_i1_scaled(0.5 * eps))
}

pub fn eve_model(cfg: &SystemConfig) -> Result<EveSnrModel> {
    eve_model_with(cfg, &MarcumPolyCoeffs::STANDARD)
}

/// Builds the eavesdropper model with custom surrogate coefficients.
pub fn eve_model_with(cfg: &SystemConfig, coeffs: &MarcumPolyCoeffs) -> Result<EveSnrModel> {
    cfg.validate()?;
    let eps = cfg.rician_eps;
    let l = RicianAmplitude::new(eps)?.laguerre;
    // squared mean-to-spread ratio of the co-phased eavesdropper sum
    let coherence_sq = if eps == 0.0 {
        0.0
    } else {
        eps * eps / (std::f64::consts::FRAC_PI_4 * (eps + 1.0) * l * l)
    };
    let var_unit = 1.0 - coherence_sq;
    if !(var_unit > 0.0) {
        return Err(Error::domain(
            "eve_model",
            format!("eavesdropper variance vanishes at eps={eps}; use the deterministic limit"),
        ));
    }
    let n = cfg.n_ris as f64;
    let sqrt_n = cfg.sqrt_n();
    let (rd, re) = (cfg.angles.rd_aod, cfg.angles.re_aod);
    let delta1 = rd.azimuth.sin() * rd.elevation.sin() - re.azimuth.sin() * re.elevation.sin();
    let delta2 = rd.elevation.cos() - re.elevation.cos();
    let d1 = dirichlet_ratio(delta1, sqrt_n, cfg.spacing_ratio);
    let d2 = dirichlet_ratio(delta2, sqrt_n, cfg.spacing_ratio);
    let mean_scale = coherence_sq.sqrt() * (d1 * d2).abs();
    let var_scale = n * var_unit;
    let varpi = std::f64::consts::SQRT_2 * mean_scale / var_scale.sqrt();
    let xi = std::f64::consts::SQRT_2 / (n * cfg.n_tx as f64 * cfg.nu() * cfg.beta0 * cfg.rho_e() * var_unit).sqrt();

    let v = coeffs.v_at(varpi);
    let mu = coeffs.mu_at(varpi);
    if !(mu > 0.0) {
        return Err(Error::domain(
            "eve_model",
            format!("Marcum surrogate exponent {mu} is not positive at varpi={varpi}"),
        ));
    }
    let a2 = cfg.alpha2.value();
    let half = 0.5 * a2;
    let model = EveSnrModel {
        varpi,
        xi,
        t0: 2.0 * PI * cfg.eve_density / (half * mu * (4.0 * v / (a2 * mu)).exp() * xi.powf(4.0 / a2)),
        t1: 2.0 / (half * mu),
        t2: v.exp() * xi.powf(mu) * cfg.eve_radius.powf(half * mu),
        t3: 0.5 * mu,
        t4: 2.0 / a2,
        delta1,
        delta2,
        mean_scale,
        var_scale,
        v,
        mu,
        eve_density: cfg.eve_density,
        eve_radius: cfg.eve_radius,
        alpha2: a2,
    };
    Ok(model)
}

impl EveSnrModel {
    /// Probability that the disk holds no eavesdropper.
    pub fn void_probability(&self) -> f64 {
        (-self.eve_density * PI * self.eve_radius * self.eve_radius).exp()
    }

    fn marcum_b(&self, x: f64, r: f64) -> f64 {
        self.xi * x.sqrt() * r.powf(0.5 * self.alpha2)
    }

    /// Radius at which the second Marcum argument reaches `b`.
    fn radius_for(&self, x: f64, b: f64) -> f64 {
        (b / (self.xi * x.sqrt())).powf(2.0 / self.alpha2)
    }

    fn radial_breaks(&self, x: f64) -> (f64, Vec<f64>) {
        let w = self.varpi;
        let upper = self.eve_radius.min(self.radius_for(x, w + 40.0));
        let breaks = [w - 2.0, w, w + 2.0, w + 5.0, w + 10.0]
            .iter()
            .filter(|&&b| b > 0.0)
            .map(|&b| self.radius_for(x, b))
            .filter(|&r| r > 0.0 && r < upper)
            .collect();
        (upper, breaks)
    }
}

/// 1 − Q₁(ϖ, Ξ√x·r^{α₂/2}): CDF of one eavesdropper's SNR at radius r.
pub fn eve_pointwise_cdf(model: &EveSnrModel, r: f64, x: f64) -> Result<f64> {
    if !(r > 0.0) || r > model.eve_radius || !(x >= 0.0) {
        return Err(Error::domain(
            "eve_pointwise_cdf",
            format!("need 0 < r <= {} and x >= 0, got r={r}, x={x}", model.eve_radius),
        ));
    }
    Ok(marcum_q1_with_tol(model.varpi, model.marcum_b(x, r), f64::EPSILON)?.complement)
}

const PGFL_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-10,
    rel_tol: 1e-8,
    max_panels: 4000,
};

fn fallible_integral<F>(f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let first_err = RefCell::new(None);
    let res = integrate_with_breaks(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                first_err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        breaks,
        PGFL_QUAD,
    )?;
    match first_err.into_inner() {
        Some(e) => Err(e),
        None => Ok(res.value),
    }
}

/// P(max eavesdropper SNR ≤ x) from the PPP generating functional with the
/// exact Marcum function. At x = 0 returns the void probability.
pub fn eve_aggregate_cdf_exact(model: &EveSnrModel, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(
            "eve_aggregate_cdf_exact",
            format!("need x >= 0, got {x}"),
        ));
    }
    if model.eve_density == 0.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(model.void_probability());
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let (upper, breaks) = model.radial_breaks(x);
    let w = model.varpi;
    let integral = fallible_integral(
        |r| Ok(r * marcum_q1_with_tol(w, model.marcum_b(x, r), f64::EPSILON)?.q),
        0.0,
        upper,
        &breaks,
    )?;
    Ok((-2.0 * PI * model.eve_density * integral).exp())
}

/// Density of the continuous part of the exact aggregate law.
pub fn eve_aggregate_pdf_exact(model: &EveSnrModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("eve_aggregate_pdf_exact", format!("need x > 0, got {x}")));
    }
    if model.eve_density == 0.0 || x.is_infinite() {
        return Ok(0.0);
    }
    let (upper, breaks) = model.radial_breaks(x);
    let w = model.varpi;
    // −∂Q₁(ϖ, b)/∂x = (b²/2x)·e^{−(b−ϖ)²/2}·Ĩ₀(ϖb)
    let j = fallible_integral(
        |r| {
            let b = model.marcum_b(x, r);
            Ok(r * b * b / (2.0 * x) * (-0.5 * (b - w) * (b - w)).exp() * bessel_i0_scaled(w * b))
        },
        0.0,
        upper,
        &breaks,
    )?;
    Ok(eve_aggregate_cdf_exact(model, x)? * 2.0 * PI * model.eve_density * j)
}

fn check_closed_arg(function: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain(function, format!("need x >= 0, got {x}")));
    }
    Ok(())
}

/// t₀·x^{−t₄}·γ(t₁, t₂x^{t₃}), the negative log of the finite-radius closed CDF.
fn closed_exponent_finite(m: &EveSnrModel, x: f64) -> Result<f64> {
    let y = m.t2 * x.powf(m.t3);
    Ok(m.t0 * x.powf(-m.t4) * ln_gamma(m.t1).exp() * gamma_p(m.t1, y)?)
}

/// Closed-form aggregate CDF for a disk of radius r_e (surrogate Marcum).
pub fn eve_aggregate_cdf_closed(model: &EveSnrModel, x: f64) -> Result<f64> {
    check_closed_arg("eve_aggregate_cdf_closed", x)?;
    if model.t0 == 0.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(model.void_probability());
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok((-closed_exponent_finite(model, x)?).exp())
}

/// Closed-form aggregate CDF in the unbounded-plane limit: exp(−t₀Γ(t₁)x^{−t₄}).
pub fn eve_aggregate_cdf_closed_infinite(model: &EveSnrModel, x: f64) -> Result<f64> {
    check_closed_arg("eve_aggregate_cdf_closed_infinite", x)?;
    if model.t0 == 0.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((-model.t0 * ln_gamma(model.t1).exp() * x.powf(-model.t4)).exp())
}

/// Density of the continuous part of [`eve_aggregate_cdf_closed`], written as
/// t₀t₃x^{−t₄−1}·γ(t₁+1, y)·F(x) to avoid the cancellation in the direct
/// derivative.
pub fn eve_aggregate_pdf(model: &EveSnrModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("eve_aggregate_pdf", format!("need x > 0, got {x}")));
    }
    if model.t0 == 0.0 || x.is_infinite() {
        return Ok(0.0);
    }
    let y = model.t2 * x.powf(model.t3);
    let p = gamma_p(model.t1 + 1.0, y)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let ln_f = model.t0.ln() + model.t3.ln() - (model.t4 + 1.0) * x.ln() + ln_gamma(model.t1 + 1.0) + p.ln()
        - closed_exponent_finite(model, x)?;
    Ok(ln_f.exp())
}

/// The derivative of the finite-radius closed CDF in its direct form,
/// t₀x^{−t₄−1}(t₄γ(t₁,y) − t₃y^{t₁}e^{−y})·F(x).
pub fn eve_aggregate_pdf_direct(model: &EveSnrModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "eve_aggregate_pdf_direct",
            format!("need x > 0, got {x}"),
        ));
    }
    let m = model;
    let y = m.t2 * x.powf(m.t3);
    let lower = ln_gamma(m.t1).exp() * gamma_p(m.t1, y)?;
    let bracket = m.t4 * lower - m.t3 * (m.t1 * y.ln() - y).exp();
    Ok(m.t0 * x.powf(-m.t4 - 1.0) * bracket * (-m.t0 * x.powf(-m.t4) * lower).exp())
}

/// Density of [`eve_aggregate_cdf_closed_infinite`].
pub fn eve_aggregate_pdf_infinite(model: &EveSnrModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "eve_aggregate_pdf_infinite",
            format!("need x > 0, got {x}"),
        ));
    }
    if model.t0 == 0.0 || x.is_infinite() {
        return Ok(0.0);
    }
    let a = model.t0 * ln_gamma(model.t1).exp();
    let ln_f = a.ln() + model.t4.ln() - (model.t4 + 1.0) * x.ln() - a * x.powf(-model.t4);
    Ok(ln_f.exp())
}

/// Which law of the strongest-eavesdropper SNR to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveCdfForm {
    /// Closed form over the finite disk, with an atom at zero.
    FiniteRe,
    /// Closed form in the unbounded-plane limit.
    InfiniteRe,
    /// Generating functional with the exact Marcum function over the finite disk.
    ExactPgfl,
}

impl EveCdfForm {
    pub fn cdf(self, model: &EveSnrModel, x: f64) -> Result<f64> {
        match self {
            EveCdfForm::FiniteRe => eve_aggregate_cdf_closed(model, x),
            EveCdfForm::InfiniteRe => eve_aggregate_cdf_closed_infinite(model, x),
            EveCdfForm::ExactPgfl => eve_aggregate_cdf_exact(model, x),
        }
    }

    pub fn pdf(self, model: &EveSnrModel, x: f64) -> Result<f64> {
        match self {
            EveCdfForm::FiniteRe => eve_aggregate_pdf(model, x),
            EveCdfForm::InfiniteRe => eve_aggregate_pdf_infinite(model, x),
            EveCdfForm::ExactPgfl => eve_aggregate_pdf_exact(model, x),
        }
    }

    /// Probability mass at γ_E = 0.
    pub fn atom(self, model: &EveSnrModel) -> f64 {
        match self {
            EveCdfForm::InfiniteRe => {
                if model.t0 == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => model.void_probability(),
        }
    }
}
