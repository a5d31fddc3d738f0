//! Meijer G^{m,0}_{0,m}(z | b₁…b_m) for real parameters and z > 0.
//!
//! Two evaluators: the residue series about z = 0 (all parameter differences
//! non-integer) and a Mellin–Barnes line integral through the saddle point of
//! the integrand on the real axis. Both work in log space so large Γ products
//! do not overflow.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::{digamma, ln_gamma, ln_gamma_complex, ln_gamma_signed, trigamma};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};

/// Distance from an integer below which two parameters count as degenerate.
const DEGENERATE_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeijerGRestricted {
    b: Vec<f64>,
    z: f64,
}

impl MeijerGRestricted {
    pub fn new(b: Vec<f64>, z: f64) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::domain("meijer_g", "parameter list is empty"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("meijer_g", "parameters must be finite"));
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::domain("meijer_g", format!("argument z = {z} must be positive")));
        }
        Ok(MeijerGRestricted { b, z })
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn order(&self) -> usize {
        self.b.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeijerMethod {
    Series,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerOptions {
    /// Below this z the residue series is tried first.
    pub switch_z: f64,
    /// Requested relative accuracy.
    pub tol: f64,
    /// Use the contour when the series is degenerate or loses accuracy.
    pub contour_fallback: bool,
}

impl Default for MeijerOptions {
    fn default() -> Self {
        MeijerOptions {
            switch_z: 1.0,
            tol: 1e-10,
            contour_fallback: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerEstimate {
    pub ln_value: f64,
    /// Estimated relative error of `exp(ln_value)`.
    pub rel_error: f64,
    pub method: MeijerMethod,
}

impl MeijerEstimate {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

/// G^{m,0}_{0,m}(z | b) with default options.
pub fn meijer_g_m0_0m(g: &MeijerGRestricted) -> Result<f64> {
    Ok(ln_meijer_g(g, &MeijerOptions::default())?.value())
}

/// ln G^{m,0}_{0,m}(z | b), choosing series or contour per `opts`.
pub fn ln_meijer_g(g: &MeijerGRestricted, opts: &MeijerOptions) -> Result<MeijerEstimate> {
    if g.z < opts.switch_z {
        match meijer_series(g, opts.tol) {
            Ok(est) => return Ok(est),
            Err(e @ (Error::DegenerateParameters { .. } | Error::Convergence { .. })) => {
                if !opts.contour_fallback {
                    return Err(e);
                }
            }
            Err(e) => return Err(e),
        }
    }
    meijer_contour(g, opts.tol)
}

fn check_degenerate(b: &[f64]) -> Result<()> {
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let d = b[i] - b[j];
            if (d - d.round()).abs() < DEGENERATE_GAP {
                return Err(Error::DegenerateParameters {
                    i,
                    j,
                    bi: b[i],
                    bj: b[j],
                });
            }
        }
    }
    Ok(())
}

struct ResidueTerm {
    ln_abs: f64,
    sign: f64,
    rel_err: f64,
}

/// Σ_h Π_{j≠h} Γ(b_j − b_h) z^{b_h} ₀F_{m−1}(; 1 + b_h − b_j; (−1)^m z).
pub fn meijer_series(g: &MeijerGRestricted, tol: f64) -> Result<MeijerEstimate> {
    let b = &g.b;
    check_degenerate(b)?;
    let m = b.len();
    let lnz = g.z.ln();
    let w = if m.is_multiple_of(2) { g.z } else { -g.z };
    let eps = f64::EPSILON;

    let mut terms = Vec::with_capacity(m);
    for h in 0..m {
        let mut ln_abs = b[h] * lnz;
        let mut sign = 1.0;
        let mut magnitude = (b[h] * lnz).abs();
        let mut lower = Vec::with_capacity(m - 1);
        for j in (0..m).filter(|&j| j != h) {
            let (lg, s) = ln_gamma_signed(b[j] - b[h]);
            ln_abs += lg;
            sign *= s;
            magnitude += lg.abs();
            lower.push(1.0 + b[h] - b[j]);
        }

        let (sum, peak, n) = hyp0f(&lower, w)?;
        if sum == 0.0 {
            continue;
        }
        terms.push(ResidueTerm {
            ln_abs: ln_abs + sum.abs().ln(),
            sign: sign * sum.signum(),
            rel_err: eps * (magnitude + 8.0) + eps * (n as f64 + 4.0) * peak / sum.abs(),
        });
    }

    let top = terms.iter().map(|t| t.ln_abs).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut err = 0.0;
    for t in &terms {
        let scaled = (t.ln_abs - top).exp();
        total += t.sign * scaled;
        err += scaled * t.rel_err;
    }
    // the final summation itself
    err += eps * m as f64 * terms.iter().map(|t| (t.ln_abs - top).exp()).sum::<f64>();
    if !(total > 0.0) {
        return Err(Error::Convergence {
            routine: "meijer_g residue series",
            achieved: f64::INFINITY,
            requested: tol,
        });
    }
    let rel = err / total;
    if rel > tol {
        return Err(Error::Convergence {
            routine: "meijer_g residue series",
            achieved: rel,
            requested: tol,
        });
    }
    Ok(MeijerEstimate {
        ln_value: top + total.ln(),
        rel_error: rel,
        method: MeijerMethod::Series,
    })
}

/// ₀F_r(; c; w). Returns (sum, largest |term|, terms used).
fn hyp0f(c: &[f64], w: f64) -> Result<(f64, f64, usize)> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut peak = 1.0f64;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let mut denom = nf + 1.0;
        for &cj in c {
            denom *= cj + nf;
        }
        term *= w / denom;
        sum += term;
        peak = peak.max(term.abs());
        n += 1;
        let nf = n as f64;
        // Once every c_j + n is positive the term ratios shrink monotonically,
        // so a ratio below 1/2 bounds the tail by the current term.
        let settled = c.iter().all(|&cj| cj + nf > 0.0);
        if settled {
            let mut next = nf + 1.0;
            for &cj in c {
                next *= cj + nf;
            }
            let ratio = w.abs() / next;
            if ratio < 0.5 && term.abs() * 2.0 * ratio <= f64::EPSILON * 0.25 * sum.abs().max(f64::MIN_POSITIVE) {
                return Ok((sum, peak, n));
            }
            if term == 0.0 {
                return Ok((sum, peak, n));
            }
        }
        if n > 100_000 {
            return Err(Error::Convergence {
                routine: "meijer_g hypergeometric factor",
                achieved: (term / sum).abs(),
                requested: f64::EPSILON,
            });
        }
    }
}

/// Real saddle of Π Γ(b_j + c) z^{−c}: solves Σ ψ(b_j + c) = ln z.
/// Returns c, clamped so that min(b) + c ≥ `MIN_OFFSET`.
fn saddle(b: &[f64], lnz: f64) -> f64 {
    const MIN_OFFSET: f64 = 0.05;
    let bmin = b.iter().copied().fold(f64::INFINITY, f64::min);
    let f = |u: f64| b.iter().map(|&bj| digamma(bj - bmin + u)).sum::<f64>() - lnz;
    if f(MIN_OFFSET) >= 0.0 {
        return MIN_OFFSET - bmin;
    }
    let mut lo = MIN_OFFSET;
    let mut hi = 1.0f64.max(2.0 * MIN_OFFSET);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    0.5 * (lo + hi) - bmin
}

/// Mellin–Barnes integral along Re s = c through the real saddle point.
pub fn meijer_contour(g: &MeijerGRestricted, tol: f64) -> Result<MeijerEstimate> {
    let b = &g.b;
    let lnz = g.z.ln();
    let c = saddle(b, lnz);
    let base: f64 = b.iter().map(|&bj| ln_gamma(bj + c)).sum();
    let curvature: f64 = b.iter().map(|&bj| trigamma(bj + c)).sum();
    let width = 1.0 / curvature.sqrt();

    let log_integrand = |t: f64| -> Complex64 {
        let mut acc = Complex64::new(-base, -t * lnz);
        for &bj in b {
            acc += ln_gamma_complex(Complex64::new(bj + c, t));
        }
        acc
    };
    let integrand = |t: f64| {
        let l = log_integrand(t);
        if l.re < -745.0 {
            0.0
        } else {
            l.exp().re
        }
    };

    // Extent: where the modulus has fallen far below the peak value 1.
    let cutoff = (f64::EPSILON * tol.min(1e-6) * 1e-4).ln();
    let mut upper = width;
    while log_integrand(upper).re > cutoff {
        upper *= 1.5;
        if upper > 1e7 {
            return Err(Error::Convergence {
                routine: "meijer_g contour extent",
                achieved: log_integrand(upper).re.exp(),
                requested: tol,
            });
        }
    }
    let breaks: Vec<f64> = (1..64).map(|i| i as f64 * 0.5 * width).filter(|&t| t < upper).collect();
    let opts = QuadOptions {
        abs_tol: 1e-3 * tol * width,
        rel_tol: 0.1 * tol,
        max_panels: 20_000,
    };
    let r = integrate_with_breaks(integrand, 0.0, upper, &breaks, opts)?;
    if !(r.value > 0.0) {
        return Err(Error::Convergence {
            routine: "meijer_g contour",
            achieved: r.abs_error,
            requested: tol,
        });
    }
    let ln_value = -c * lnz + base + (r.value / std::f64::consts::PI).ln();
    let rel_error = r.abs_error / r.value + f64::EPSILON * (base.abs() + (c * lnz).abs() + 8.0);
    Ok(MeijerEstimate {
        ln_value,
        rel_error,
        method: MeijerMethod::Contour,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel::bessel_k;
    use std::f64::consts::PI;

    fn g(b: &[f64], z: f64) -> MeijerGRestricted {
        MeijerGRestricted::new(b.to_vec(), z).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn order_one_is_exponential() {
        for &z in &[0.1, 1.0, 5.0] {
            let v = meijer_g_m0_0m(&g(&[0.0], z)).unwrap();
            assert!(rel(v, (-z).exp()) < 1e-10, "z={z}");
            let c = meijer_contour(&g(&[0.0], z), 1e-10).unwrap().value();
            assert!(rel(c, (-z).exp()) < 1e-10, "contour z={z}");
        }
        let s = meijer_series(&g(&[0.7], 0.3), 1e-12).unwrap().value();
        assert!(rel(s, 0.3f64.powf(0.7) * (-0.3f64).exp()) < 1e-13);
    }

    #[test]
    fn order_two_is_bessel_k() {
        let nu = 1.37;
        for &z in &[0.25f64, 0.8, 3.0, 40.0] {
            let want = 2.0 * bessel_k(nu, 2.0 * z.sqrt()).unwrap();
            let v = meijer_g_m0_0m(&g(&[nu / 2.0, -nu / 2.0], z)).unwrap();
            assert!(rel(v, want) < 1e-9, "z={z}: {v} vs {want}");
        }
    }

    #[test]
    fn integer_order_bessel_goes_to_contour() {
        // ν = 1 makes the two parameters differ by an integer.
        let gg = g(&[0.5, -0.5], 0.25);
        assert!(matches!(
            meijer_series(&gg, 1e-10),
            Err(Error::DegenerateParameters { .. })
        ));
        let strict = MeijerOptions {
            contour_fallback: false,
            ..Default::default()
        };
        assert!(ln_meijer_g(&gg, &strict).is_err());
        let est = ln_meijer_g(&gg, &MeijerOptions::default()).unwrap();
        assert_eq!(est.method, MeijerMethod::Contour);
        let want = 2.0 * bessel_k(1.0, 1.0).unwrap();
        assert!(rel(est.value(), want) < 1e-9);
    }

    #[test]
    fn gauss_multiplication_reduction() {
        // G^{6,0}(z | 0, 1/2, k/4, …, (k+3)/4) = (2π)^{3/2} 2^{-k} G^{3,0}(8√z | 0, k/2, (k+1)/2)
        let k = 3.7;
        let six = [0.0, 0.5, k / 4.0, (k + 1.0) / 4.0, (k + 2.0) / 4.0, (k + 3.0) / 4.0];
        let three = [0.0, k / 2.0, (k + 1.0) / 2.0];
        for &z in &[1e-4, 0.01, 0.3, 2.0, 50.0] {
            let lhs = ln_meijer_g(&g(&six, z), &MeijerOptions::default()).unwrap().ln_value;
            let rhs = 1.5 * (2.0 * PI).ln() - k * 2f64.ln()
                + ln_meijer_g(&g(&three, 8.0 * z.sqrt()), &MeijerOptions::default())
                    .unwrap()
                    .ln_value;
            assert!((lhs - rhs).abs() < 1e-9, "z={z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn series_and_contour_agree_on_overlap() {
        let sets: [&[f64]; 3] = [
            &[0.0, 0.5, 0.93, 1.18, 1.43, 1.68],
            &[0.0, 1.0 / 3.0, 2.0 / 3.0, 4.1, 4.35, 4.6, 4.85],
            &[0.0, 0.37, 2.2],
        ];
        for b in sets {
            for &z in &[0.05, 0.2, 0.5, 1.0, 2.0] {
                let s = meijer_series(&g(b, z), 1e-8).unwrap();
                let c = meijer_contour(&g(b, z), 1e-10).unwrap();
                assert!(
                    (s.ln_value - c.ln_value).abs() < 1e-8,
                    "b={b:?} z={z}: {} vs {}",
                    s.ln_value,
                    c.ln_value
                );
            }
        }
    }

    #[test]
    fn large_parameters_stay_finite() {
        let k = 98.8;
        let b = [0.0, 0.5, k / 4.0, (k + 1.0) / 4.0, (k + 2.0) / 4.0, (k + 3.0) / 4.0];
        for &z in &[1e-12, 1e-6, 0.5, 1e3, 1e9] {
            let est = ln_meijer_g(&g(&b, z), &MeijerOptions::default()).unwrap();
            assert!(est.ln_value.is_finite(), "z={z}");
        }
        // small-z limit: G → Π_{j≥2} Γ(b_j)
        let lim: f64 = b[1..].iter().map(|&x| ln_gamma(x)).sum();
        let est = ln_meijer_g(&g(&b, 1e-14), &MeijerOptions::default()).unwrap();
        assert!((est.ln_value - lim).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MeijerGRestricted::new(vec![], 1.0).is_err());
        assert!(MeijerGRestricted::new(vec![0.0], 0.0).is_err());
        assert!(MeijerGRestricted::new(vec![0.0], -1.0).is_err());
        assert!(MeijerGRestricted::new(vec![f64::NAN], 1.0).is_err());
    }
}
