//! First-order Marcum Q function and its two-coefficient polynomial surrogate.

use serde::{Deserialize, Serialize};

use super::bessel::{bessel_i_ratio_bound, bessel_i_scaled_sequence};
use crate::error::{Error, Result};

/// Q₁ together with its complement, each computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarcumQ {
    pub q: f64,
    pub complement: f64,
    /// Bound on the truncation error of whichever side was summed.
    pub error_bound: f64,
}

/// Q₁(a, b) for a, b ≥ 0.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    Ok(marcum_q1_with_tol(a, b, f64::EPSILON)?.q)
}

/// Q₁(a, b) with a requested relative truncation tolerance on the summed side.
pub fn marcum_q1_with_tol(a: f64, b: f64, tol: f64) -> Result<MarcumQ> {
    if !(a >= 0.0) || !(b >= 0.0) || !a.is_finite() {
        return Err(Error::domain("marcum_q1", format!("need a, b >= 0, got a={a}, b={b}")));
    }
    let tol = tol.max(f64::EPSILON);
    if b == f64::INFINITY {
        return Ok(MarcumQ {
            q: 0.0,
            complement: 1.0,
            error_bound: 0.0,
        });
    }
    if a == 0.0 {
        let q = (-0.5 * b * b).exp();
        return Ok(MarcumQ {
            q,
            complement: -(-0.5 * b * b).exp_m1(),
            error_bound: 0.0,
        });
    }
    if b == 0.0 {
        return Ok(MarcumQ {
            q: 1.0,
            complement: 0.0,
            error_bound: 0.0,
        });
    }
    if b - a > 40.0 {
        return Ok(MarcumQ {
            q: 0.0,
            complement: 1.0,
            error_bound: (-800f64).exp(),
        });
    }
    if a - b > 40.0 {
        return Ok(MarcumQ {
            q: 1.0,
            complement: 0.0,
            error_bound: (-800f64).exp(),
        });
    }

    let x = a * b;
    let upper = b >= a;
    // Q = e^{-(b-a)²/2} Σ_{k≥0} (a/b)^k Ĩ_k(ab)         when b ≥ a
    // 1-Q = e^{-(a-b)²/2} Σ_{k≥1} (b/a)^k Ĩ_k(ab)       otherwise
    let ratio = if upper { a / b } else { b / a };
    let first = if upper { 0 } else { 1 };
    let pref = (-0.5 * (a - b) * (a - b)).exp();

    let mut kmax = 40 + (10.0 * x.sqrt()).ceil() as usize;
    for _ in 0..6 {
        let seq = bessel_i_scaled_sequence(x, kmax);
        let mut sum = 0.0;
        let mut pw = ratio.powi(first as i32);
        let mut last = 0.0;
        for ik in seq.iter().skip(first) {
            last = pw * ik;
            sum += last;
            pw *= ratio;
        }
        let decay = ratio * bessel_i_ratio_bound(kmax as f64, x);
        let tail = if decay < 1.0 {
            last * decay / (1.0 - decay)
        } else {
            f64::INFINITY
        };
        if tail <= tol * sum || sum == 0.0 {
            let side = pref * sum;
            let err = pref * tail + 4.0 * f64::EPSILON * side;
            let (q, complement) = if upper { (side, 1.0 - side) } else { (1.0 - side, side) };
            return Ok(MarcumQ {
                q: q.clamp(0.0, 1.0),
                complement: complement.clamp(0.0, 1.0),
                error_bound: err,
            });
        }
        kmax *= 2;
    }
    Err(Error::Convergence {
        routine: "marcum_q1 Bessel series",
        achieved: f64::NAN,
        requested: tol,
    })
}

/// Quartic coefficients of the surrogate Q₁(a, b) ≈ exp(−e^{v(a)} b^{μ(a)}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarcumPolyCoeffs {
    /// v(a) = Σ v[i] a^i
    pub v: [f64; 5],
    /// μ(a) = Σ mu[i] a^i
    pub mu: [f64; 5],
}

impl MarcumPolyCoeffs {
    pub const STANDARD: MarcumPolyCoeffs = MarcumPolyCoeffs {
        v: [-0.840, 0.327, -0.740, 0.083, -0.004],
        mu: [2.174, -0.592, 0.593, -0.092, 0.005],
    };

    pub fn v_at(&self, a: f64) -> f64 {
        horner(&self.v, a)
    }

    pub fn mu_at(&self, a: f64) -> f64 {
        horner(&self.mu, a)
    }
}

impl Default for MarcumPolyCoeffs {
    fn default() -> Self {
        Self::STANDARD
    }
}

fn horner(c: &[f64; 5], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Surrogate Q₁ with the standard coefficients.
pub fn marcum_q1_poly_approx(a: f64, b: f64) -> f64 {
    marcum_q1_poly_approx_with(a, b, &MarcumPolyCoeffs::STANDARD)
}

pub fn marcum_q1_poly_approx_with(a: f64, b: f64, c: &MarcumPolyCoeffs) -> f64 {
    (-(c.v_at(a).exp()) * b.powf(c.mu_at(a))).exp()
}
