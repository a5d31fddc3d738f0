//! Outage probability by direct numerical integration, in two independent forms.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use super::result::{config_hash, SopMethod, SopResult};
use crate::analytic::{cdf_gamma_d, pdf_gamma_d, EveCdfForm, EveSnrModel, LegitSnrModel};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::special::ln_gamma;

const ABS_TOL: f64 = 1e-10;
const REL_TOL: f64 = 1e-8;
/// Neglected probability mass beyond the upper integration limit.
const TAIL_MASS: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSop {
    /// ∫ F_D((1+x)φ−1) dF_E(x), atom included.
    pub eve_side: f64,
    /// 1 − ∫ F_E((1+x)/φ−1) dF_D(x).
    pub user_side: f64,
    pub eve_side_error: f64,
    pub user_side_error: f64,
}

/// Lower and upper ends of the region where γ_D carries all but ~1e-14 of its mass.
fn user_range(legit: &LegitSnrModel) -> (f64, f64) {
    let k = legit.gamma_shape;
    let lo_u = (k * 1e-2).min(((ln_gamma(k + 1.0) - 14.0 * std::f64::consts::LN_10) / k).exp());
    let hi_u = k + 12.0 * k.sqrt() + 40.0;
    let to_x = |u: f64| legit.rho_d * (legit.gamma_scale * u).powi(2);
    (to_x(lo_u), to_x(hi_u))
}

/// Same for the eavesdropper side, from the unbounded-plane law, which has
/// the heaviest tail of the three forms.
fn eve_range(eve: &EveSnrModel) -> Option<(f64, f64)> {
    if eve.t0 == 0.0 {
        return None;
    }
    let a = eve.t0 * ln_gamma(eve.t1).exp();
    let lo = (a / (14.0 * std::f64::consts::LN_10)).powf(1.0 / eve.t4);
    let hi = (a / TAIL_MASS).powf(1.0 / eve.t4);
    Some((lo, hi))
}

/// Break points at four per decade of x in [lo, hi], mapped to u = ln(1+x).
fn log_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(lo > 0.0) || !(hi > lo) {
        return out;
    }
    let decades = (hi / lo).log10();
    let n = (4.0 * decades).ceil().max(1.0) as usize;
    for i in 0..=n {
        let x = lo * 10f64.powf(decades * i as f64 / n as f64);
        out.push(x.ln_1p());
    }
    out
}

fn integrate_fallible<F>(f: F, a: f64, b: f64, breaks: &[f64]) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let first_err = RefCell::new(None);
    let opts = QuadOptions {
        abs_tol: ABS_TOL,
        rel_tol: REL_TOL,
        max_panels: 20_000,
    };
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
        opts,
    )?;
    match first_err.into_inner() {
        Some(e) => Err(e),
        None => Ok((res.value, res.abs_error)),
    }
}

/// Outage event used inside the integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutageKernel {
    /// ln(1+γ_D) − ln(1+γ_E) < C_th.
    Exact,
    /// γ_D/γ_E < e^{C_th}: the high-SNR event underlying the closed forms.
    RatioOnly,
}

impl OutageKernel {
    /// User SNR threshold for a given eavesdropper SNR, with x = e^u − 1.
    fn user_threshold(self, u: f64, c_th: f64) -> f64 {
        match self {
            OutageKernel::Exact => (u + c_th).exp_m1(),
            OutageKernel::RatioOnly => c_th.exp() * u.exp_m1(),
        }
    }

    /// Eavesdropper SNR threshold for a given user SNR, with x = e^u − 1.
    fn eve_threshold(self, u: f64, c_th: f64) -> f64 {
        match self {
            OutageKernel::Exact => (u - c_th).exp_m1().max(0.0),
            OutageKernel::RatioOnly => u.exp_m1() / c_th.exp(),
        }
    }

    /// Smallest user SNR that can avoid outage, as u = ln(1+x).
    fn user_floor(self, c_th: f64) -> f64 {
        match self {
            OutageKernel::Exact => c_th,
            OutageKernel::RatioOnly => 0.0,
        }
    }

    /// u on the user axis at which the eavesdropper threshold equals y.
    fn user_u_for_eve(self, y: f64, c_th: f64) -> f64 {
        match self {
            OutageKernel::Exact => y.ln_1p() + c_th,
            OutageKernel::RatioOnly => (c_th.exp() * y).ln_1p(),
        }
    }
}

/// Evaluates both integral forms without comparing them.
pub fn sop_quadrature_forms(
    legit: &LegitSnrModel,
    eve: &EveSnrModel,
    c_th: f64,
    form: EveCdfForm,
    kernel: OutageKernel,
) -> Result<QuadratureSop> {
    if !(c_th >= 0.0) || !c_th.is_finite() {
        return Err(Error::domain(
            "sop_quadrature",
            format!("need finite c_th >= 0, got {c_th}"),
        ));
    }
    let atom = form.atom(eve);
    let (d_lo, d_hi) = user_range(legit);
    let floor = kernel.user_floor(c_th);

    // Eve side, x = e^u − 1.
    let at_zero = cdf_gamma_d(legit, kernel.user_threshold(0.0, c_th))?;
    let (eve_side, eve_side_error) = match eve_range(eve) {
        None => (at_zero, 0.0),
        Some((e_lo, e_hi)) => {
            let hi = e_hi.max(d_hi);
            let u_max = hi.ln_1p();
            let mut breaks = log_breaks(e_lo.min(d_lo), hi);
            breaks.retain(|&u| u > 0.0 && u < u_max);
            let (v, err) = integrate_fallible(
                |u| {
                    let x = u.exp_m1();
                    if x <= 0.0 {
                        return Ok(0.0);
                    }
                    let fe = form.pdf(eve, x)?;
                    if fe == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(cdf_gamma_d(legit, kernel.user_threshold(u, c_th))? * fe * u.exp())
                },
                0.0,
                u_max,
                &breaks,
            )?;
            (v + atom * at_zero, err)
        }
    };

    // User side, from the no-outage floor upward.
    let (user_side, user_side_error) = {
        let u_max = d_hi.max(floor.exp_m1()).ln_1p() + 1.0;
        let mut breaks = log_breaks(d_lo.max(floor.exp_m1() * 1e-3).max(f64::MIN_POSITIVE), d_hi);
        if let Some((e_lo, e_hi)) = eve_range(eve) {
            let mut y = e_lo;
            while y < e_hi.min(d_hi) {
                breaks.push(kernel.user_u_for_eve(y, c_th));
                y *= 10f64.powf(0.25);
            }
        }
        breaks.retain(|&u| u > floor && u < u_max);
        breaks.sort_by(f64::total_cmp);
        let (v, err) = integrate_fallible(
            |u| {
                let x = u.exp_m1();
                if x <= 0.0 {
                    return Ok(0.0);
                }
                let fd = pdf_gamma_d(legit, x)?;
                if fd == 0.0 {
                    return Ok(0.0);
                }
                let y = kernel.eve_threshold(u, c_th);
                let fe = if y == 0.0 { atom } else { form.cdf(eve, y)? };
                Ok(fe * fd * u.exp())
            },
            floor,
            u_max,
            &breaks,
        )?;
        (1.0 - v, err)
    };

    Ok(QuadratureSop {
        eve_side,
        user_side,
        eve_side_error,
        user_side_error,
    })
}

/// Outage probability from the two integral forms, which must agree.
pub fn sop_quadrature(legit: &LegitSnrModel, eve: &EveSnrModel, c_th: f64, form: EveCdfForm) -> Result<SopResult> {
    sop_quadrature_with(legit, eve, c_th, form, OutageKernel::Exact)
}

pub fn sop_quadrature_with(
    legit: &LegitSnrModel,
    eve: &EveSnrModel,
    c_th: f64,
    form: EveCdfForm,
    kernel: OutageKernel,
) -> Result<SopResult> {
    let q = sop_quadrature_forms(legit, eve, c_th, form, kernel)?;
    let value = 0.5 * (q.eve_side + q.user_side);
    let gap = (q.eve_side - q.user_side).abs();
    let tol = 2.0 * (ABS_TOL + REL_TOL * value.abs()) + q.eve_side_error + q.user_side_error;
    if gap > 10.0 * tol {
        return Err(Error::Consistency {
            quantity: "outage probability (integral forms)",
            lhs: q.eve_side,
            rhs: q.user_side,
        });
    }
    let hash = config_hash(&("sop_quadrature", legit, eve, c_th, form, kernel));
    Ok(SopResult::new(
        value,
        SopMethod::Quadrature,
        gap + q.eve_side_error + q.user_side_error,
        hash,
    ))
}
