//! Gamma function family: log-gamma (real and complex), digamma and the
//! incomplete gamma functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// B_{2k} / (2k (2k-1)) for k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const SHIFT_TO: f64 = 10.0;

fn stirling_real(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

fn stirling_complex(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

/// `sin(πx)` with the argument reduced modulo 2 first.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    (PI * r).sin()
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= SHIFT_TO {
        return stirling_real(x);
    }
    let mut prod = 1.0;
    let mut y = x;
    while y < SHIFT_TO {
        prod *= y;
        y += 1.0;
    }
    stirling_real(y) - prod.ln()
}

/// Returns `(ln |Γ(x)|, sign Γ(x))` for any real x that is not a pole.
/// At poles returns `(∞, NaN)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (ln_gamma(x), 1.0);
    }
    if x == x.floor() {
        return (f64::INFINITY, f64::NAN);
    }
    let s = sin_pi(x);
    let lg = PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    (lg, s.signum())
}

/// Γ(x) for real non-pole x. Overflows to ±∞ beyond x ≈ 171.6.
pub fn gamma(x: f64) -> f64 {
    let (lg, sign) = ln_gamma_signed(x);
    sign * lg.exp()
}

fn ln_sin_pi_complex(z: Complex64) -> Complex64 {
    // sin(πz) overflows for |Im z| beyond a few hundred; factor out the growth.
    let y = z.im;
    if y.abs() < 20.0 {
        return (z * PI).sin().ln();
    }
    let i = Complex64::i();
    if y > 0.0 {
        // sin(πz) = e^{-iπz} (1 - e^{2iπz}) / (-2i)
        -i * PI * z + (-(2.0 * i * PI * z).exp()).ln_1p_c() - (-2.0 * i).ln()
    } else {
        // sin(πz) = e^{iπz} (1 - e^{-2iπz}) / (2i)
        i * PI * z + (-(-2.0 * i * PI * z).exp()).ln_1p_c() - (2.0 * i).ln()
    }
}

trait Ln1p {
    fn ln_1p_c(self) -> Complex64;
}

impl Ln1p for Complex64 {
    fn ln_1p_c(self) -> Complex64 {
        if self.norm() < 1e-8 {
            self - self * self * 0.5
        } else {
            (self + 1.0).ln()
        }
    }
}

/// Principal-branch-agnostic ln Γ(z) for complex z away from the poles.
/// Only `exp` of the result is meaningful; the imaginary part may differ from
/// the principal branch by a multiple of 2π.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        let one_minus = Complex64::new(1.0, 0.0) - z;
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi_complex(z) - ln_gamma_complex(one_minus);
    }
    if z.norm() >= SHIFT_TO {
        return stirling_complex(z);
    }
    let mut prod = Complex64::new(1.0, 0.0);
    let mut w = z;
    while w.norm() < SHIFT_TO {
        prod *= w;
        w += 1.0;
    }
    stirling_complex(w) - prod.ln()
}

/// Digamma ψ(x) for x > 0.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    let mut y = x;
    while y < SHIFT_TO {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + y.ln() - 0.5 / y - tail
}

/// Trigamma ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    let mut y = x;
    while y < SHIFT_TO {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let tail = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0
                        - inv2
                            * (1.0 / 42.0
                                - inv2
                                    * (1.0 / 30.0
                                        - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0))))));
    acc + tail
}

const MAX_ITER: usize = 100_000;

fn check_incomplete_args(function: &'static str, a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(function, format!("shape a = {a} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(function, format!("argument x = {x} must be nonnegative")));
    }
    Ok(())
}

/// e^{-x} x^a / Γ(a), the common prefactor of the incomplete gamma expansions.
fn incomplete_prefactor(a: f64, x: f64) -> f64 {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            return Ok(sum * incomplete_prefactor(a, x));
        }
    }
    Err(Error::Convergence {
        routine: "incomplete gamma series",
        achieved: del / sum,
        requested: 1e-17,
    })
}

fn upper_continued_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            return Ok(h * incomplete_prefactor(a, x));
        }
    }
    Err(Error::Convergence {
        routine: "incomplete gamma continued fraction",
        achieved: f64::NAN,
        requested: 1e-16,
    })
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args("gamma_p", a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        Ok(1.0 - upper_continued_fraction(a, x)?)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args("gamma_q", a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - lower_series(a, x)?)
    } else {
        upper_continued_fraction(a, x)
    }
}

/// Lower incomplete gamma γ(a, x).
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(gamma_p(a, x)? * ln_gamma(a).exp())
}

/// Upper incomplete gamma Γ(a, x).
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(gamma_q(a, x)? * ln_gamma(a).exp())
}
