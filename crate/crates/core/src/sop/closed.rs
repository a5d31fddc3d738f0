//! Meijer-G closed form, its Bessel/low-order special cases, and the
//! high-SNR power law.

use std::f64::consts::{LN_2, PI};

use super::quadrature::sop_quadrature;
use super::result::{config_hash, SopMethod, SopResult};
use crate::analytic::{EveCdfForm, EveSnrModel, LegitSnrModel};
use crate::channel::RationalExponent;
use crate::error::{Error, Result};
use crate::special::{gamma_q, ln_bessel_k, ln_gamma, ln_gamma_signed, ln_meijer_g, MeijerGRestricted, MeijerOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedOptions {
    /// Largest Meijer-G order p + 4q evaluated directly.
    pub max_order: usize,
    pub meijer: MeijerOptions,
    /// Relative size of the neglected upper incomplete gamma that triggers a
    /// finite-radius warning.
    pub radius_warning: f64,
}

impl Default for ClosedOptions {
    fn default() -> Self {
        ClosedOptions {
            max_order: 40,
            meijer: MeijerOptions::default(),
            radius_warning: 1e-3,
        }
    }
}

fn check_c_th(c_th: f64) -> Result<()> {
    if !(c_th >= 0.0) || !c_th.is_finite() {
        return Err(Error::domain("sop", format!("need finite c_th >= 0, got {c_th}")));
    }
    Ok(())
}

fn check_exponent(eve: &EveSnrModel, alpha2: f64) -> Result<()> {
    if (eve.alpha2 - alpha2).abs() > 1e-12 * alpha2 {
        return Err(Error::NotApplicable(format!(
            "eavesdropper model was built for alpha2={}, requested {alpha2}",
            eve.alpha2
        )));
    }
    Ok(())
}

/// ln(t₀Γ(t₁)), the scale of the unbounded-plane eavesdropper law.
fn ln_eve_scale(eve: &EveSnrModel) -> f64 {
    eve.t0.ln() + ln_gamma(eve.t1)
}

/// 1 − e^{ln_s} with the uncertainty carried through.
fn complement(ln_s: f64, rel_err: f64) -> (f64, f64) {
    let s = ln_s.exp();
    (-ln_s.exp_m1(), s * rel_err + 4.0 * f64::EPSILON)
}

/// Argument and parameter vector of the order-(p+4q) Meijer-G in the closed form.
pub fn closed_form_meijer(
    legit: &LegitSnrModel,
    eve: &EveSnrModel,
    c_th: f64,
    alpha2: RationalExponent,
) -> (f64, Vec<f64>) {
    let (p, q) = (alpha2.p() as f64, alpha2.q() as f64);
    let k = legit.gamma_shape;
    let ln_b = ln_eve_scale(eve) + eve.t4 * c_th;
    let ln_z = p * ln_b - p * p.ln() - 4.0 * q * (4.0 * q * legit.rho_d.sqrt() * legit.gamma_scale).ln();
    let mut b: Vec<f64> = (0..alpha2.p()).map(|i| i as f64 / p).collect();
    b.extend((0..4 * alpha2.q()).map(|i| (k + i as f64) / (4.0 * q)));
    (ln_z, b)
}

/// ln of the constant multiplying the Meijer-G in the closed form.
fn ln_closed_prefactor(k: f64, alpha2: RationalExponent) -> f64 {
    let (p, q) = (alpha2.p() as f64, alpha2.q() as f64);
    let m = p + 4.0 * q;
    0.5 * p.ln() + (k - 0.5) * q.ln() - (0.5 * m - 2.0 * k) * LN_2 - (0.5 * m - 1.0) * PI.ln() - ln_gamma(k)
}

/// General rational-exponent closed form with default options.
pub fn sop_closed(legit: &LegitSnrModel, eve: &EveSnrModel, c_th: f64, alpha2: RationalExponent) -> Result<SopResult> {
    sop_closed_with(legit, eve, c_th, alpha2, &ClosedOptions::default())
}

pub fn sop_closed_with(
    legit: &LegitSnrModel,
    eve: &EveSnrModel,
    c_th: f64,
    alpha2: RationalExponent,
    opts: &ClosedOptions,
) -> Result<SopResult> {
    check_c_th(c_th)?;
    check_exponent(eve, alpha2.value())?;
    let mut warnings = Vec::new();
    let order = alpha2.meijer_order();
    if order > opts.max_order {
        let mut r = sop_quadrature(legit, eve, c_th, EveCdfForm::InfiniteRe)?;
        r.warnings.push(format!(
            "closed form order p+4q={order} exceeds the cap {}; evaluated by quadrature",
            opts.max_order
        ));
        return Ok(r);
    }
    if eve.t0 == 0.0 {
        let hash = config_hash(&("sop_closed", legit, eve, c_th, alpha2));
        let mut r = SopResult::new(0.0, SopMethod::Closed, 0.0, hash);
        r.warnings
            .push("no eavesdroppers: the unbounded-plane closed form reduces to zero".into());
        return Ok(r);
    }

    // the closed form drops Γ(t₁, t₂x^{t₃}); flag it when that is not small at
    // the eavesdropper SNR matched to a typical user SNR
    let x_c = legit.rho_d * (legit.gamma_shape * legit.gamma_scale).powi(2) / c_th.exp();
    let neglected = gamma_q(eve.t1, eve.t2 * x_c.powf(eve.t3))?;
    if neglected > opts.radius_warning {
        warnings.push(format!(
            "finite eavesdropper radius is not negligible: upper incomplete gamma ratio {neglected:.3e} at x={x_c:.3e}"
        ));
    }

    let (ln_z, b) = closed_form_meijer(legit, eve, c_th, alpha2);
    let z = ln_z.exp();
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(
            "sop_closed",
            format!("Meijer-G argument out of range: ln z = {ln_z}"),
        ));
    }
    let g = ln_meijer_g(&MeijerGRestricted::new(b, z)?, &opts.meijer)?;
    let (value, err) = complement(ln_closed_prefactor(legit.gamma_shape, alpha2) + g.ln_value, g.rel_error);
    let hash = config_hash(&("sop_closed", legit, eve, c_th, alpha2));
    let mut r = SopResult::new(value, SopMethod::Closed, err, hash);
    r.warnings = warnings;
    Ok(r)
}

/// Free-space special case: order-3 Meijer-G.
pub fn sop_alpha2_freespace(legit: &LegitSnrModel, eve: &EveSnrModel, c_th: f64) -> Result<SopResult> {
    check_c_th(c_th)?;
    check_exponent(eve, 2.0)?;
    let hash = config_hash(&("sop_alpha2_freespace", legit, eve, c_th));
    if eve.t0 == 0.0 {
        return Ok(SopResult::new(0.0, SopMethod::ClosedAlpha2, 0.0, hash));
    }
    let k = legit.gamma_shape;
    let ln_w = ln_eve_scale(eve) + c_th - (4.0 * legit.rho_d * legit.gamma_scale * legit.gamma_scale).ln();
    let g = ln_meijer_g(
        &MeijerGRestricted::new(vec![0.0, 0.5 * k, 0.5 * (k + 1.0)], ln_w.exp())?,
        &MeijerOptions::default(),
    )?;
    let ln_pref = (k - 1.0) * LN_2 - 0.5 * PI.ln() - ln_gamma(k);
    let (value, err) = complement(ln_pref + g.ln_value, g.rel_error);
    Ok(SopResult::new(value, SopMethod::ClosedAlpha2, err, hash))
}

/// Argument t₀Γ(t₁)√φ/(√ρ_d·θ) of the urban special case.
pub fn alpha4_argument(legit: &LegitSnrModel, eve: &EveSnrModel, c_th: f64) -> f64 {
    (ln_eve_scale(eve) + 0.5 * c_th - 0.5 * legit.rho_d.ln() - legit.gamma_scale.ln()).exp()
}

/// Urban special case: 1 − (2/Γ(k))·w^{k/2}·K_k(2√w).
pub fn sop_alpha4_urban(legit: &LegitSnrModel, eve: &EveSnrModel, c_th: f64) -> Result<SopResult> {
    check_c_th(c_th)?;
    check_exponent(eve, 4.0)?;
    let hash = config_hash(&("sop_alpha4_urban", legit, eve, c_th));
    if eve.t0 == 0.0 {
        return Ok(SopResult::new(0.0, SopMethod::ClosedAlpha4, 0.0, hash));
    }
    let k = legit.gamma_shape;
    let ln_w = ln_eve_scale(eve) + 0.5 * c_th - 0.5 * legit.rho_d.ln() - legit.gamma_scale.ln();
    if let Some(v) = urban_small_argument(k, ln_w) {
        return Ok(SopResult::new(v, SopMethod::ClosedAlpha4, 1e-15 * v, hash));
    }
    let arg = 2.0 * (0.5 * ln_w).exp();
    let ln_s = LN_2 - ln_gamma(k) + 0.5 * k * ln_w + ln_bessel_k(k, arg)?;
    let (value, err) = complement(ln_s, 1e-13 * (1.0 + k.abs()));
    Ok(SopResult::new(value, SopMethod::ClosedAlpha4, err, hash))
}

/// 1 − (2/Γ(k))·w^{k/2}·K_k(2√w) = −Σ_{j≥1} (−w)^j Γ(k−j)/(j! Γ(k)) for small w,
/// when the w^k branch of K_k is below rounding.
fn urban_small_argument(k: f64, ln_w: f64) -> Option<f64> {
    let w = ln_w.exp();
    if !(k > 2.0) || w > 0.05 * (k - 1.0) || (k - 1.0) * ln_w > -40.0 {
        return None;
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut j = 1usize;
    while (j as f64) < k - 1.0 && j < 200 {
        term *= -w / ((k - j as f64) * j as f64);
        sum -= term;
        if term.abs() <= 1e-17 * sum.abs() {
            return Some(sum);
        }
        j += 1;
    }
    None
}

/// High-SNR power law t₀Γ(t₁)φ^{2/α₂}Γ(k−4/α₂)/(θ^{4/α₂}Γ(k))·ρ_d^{−2/α₂},
/// unclamped.
pub fn sop_asymptotic_raw(legit: &LegitSnrModel, eve: &EveSnrModel, c_th: f64, alpha2: f64) -> Result<f64> {
    check_c_th(c_th)?;
    check_exponent(eve, alpha2)?;
    let k = legit.gamma_shape;
    let s = 4.0 / alpha2;
    if k <= s {
        return Err(Error::NotApplicable(format!(
            "asymptotic form needs gamma shape k={k} > 4/alpha2={s}"
        )));
    }
    if eve.t0 == 0.0 {
        return Ok(0.0);
    }
    let ln_v = ln_eve_scale(eve) + 0.5 * s * c_th + ln_gamma(k - s)
        - s * legit.gamma_scale.ln()
        - ln_gamma(k)
        - 0.5 * s * legit.rho_d.ln();
    Ok(ln_v.exp())
}

pub fn sop_asymptotic(legit: &LegitSnrModel, eve: &EveSnrModel, c_th: f64, alpha2: f64) -> Result<SopResult> {
    let raw = sop_asymptotic_raw(legit, eve, c_th, alpha2)?;
    let hash = config_hash(&("sop_asymptotic", legit, eve, c_th, alpha2));
    let mut r = SopResult::new(raw, SopMethod::Asymptotic, 0.0, hash);
    r.abs_uncertainty = 0.0;
    if raw > 1.0 {
        r.warnings.push(format!(
            "asymptotic value {raw:.6e} exceeds 1 and was clamped; SNR too low"
        ));
    }
    Ok(r)
}

/// The closed form's small-argument expansion truncated to the constant and
/// the z^{1/p} residue terms, evaluated from the raw Gamma products.
pub fn sop_two_term_expansion(
    legit: &LegitSnrModel,
    eve: &EveSnrModel,
    c_th: f64,
    alpha2: RationalExponent,
) -> Result<f64> {
    check_c_th(c_th)?;
    check_exponent(eve, alpha2.value())?;
    let k = legit.gamma_shape;
    if k <= 4.0 / alpha2.value() {
        return Err(Error::NotApplicable(format!("expansion needs k={k} > 4/alpha2")));
    }
    let (ln_z, b) = closed_form_meijer(legit, eve, c_th, alpha2);
    let ln_pref = ln_closed_prefactor(k, alpha2);
    let p = alpha2.p() as f64;

    // constant term: Π_{j≥2} Γ(b_j)
    let ln_t0: f64 = b[1..].iter().map(|&x| ln_gamma(x)).sum();
    // z^{1/p} term
    let (ln_t1, sign) = if alpha2.p() >= 2 {
        let h = b[1];
        let mut ln_abs = 0.0;
        let mut sign = 1.0;
        for (j, &bj) in b.iter().enumerate() {
            if j == 1 {
                continue;
            }
            let (l, s) = ln_gamma_signed(bj - h);
            ln_abs += l;
            sign *= s;
        }
        (ln_abs + ln_z / p, sign)
    } else {
        // p = 1: first-order residue of the pole at zero, −Π_{j≥2}Γ(b_j − 1)·z
        let mut ln_abs = 0.0;
        let mut sign = -1.0;
        for &bj in &b[1..] {
            let (l, s) = ln_gamma_signed(bj - 1.0);
            ln_abs += l;
            sign *= s;
        }
        (ln_abs + ln_z, sign)
    };
    // 1 − pref·(T0 + T1) = −(pref·T0 − 1) − pref·T1
    Ok(-(ln_pref + ln_t0).exp_m1() - sign * (ln_pref + ln_t1).exp())
}
