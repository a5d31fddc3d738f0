//! Modified Bessel functions and the half-order Laguerre function built on them.
//!
//! Everything is computed in exponentially scaled or logarithmic form so the
//! large orders that show up in the outage closed forms (order k of a few
//! hundred) never overflow.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Above this argument the scaled I0/I1 use the Hankel asymptotic expansion.
const ASYMPTOTIC_FROM: f64 = 25.0;

fn scaled_i_series(nu: u32, x: f64) -> f64 {
    // I_ν(x) = (x/2)^ν Σ (x²/4)^k / (k! (k+ν)!)
    let q = 0.25 * x * x;
    let mut term = 1.0;
    for j in 1..=nu {
        term *= 0.5 * x / j as f64;
    }
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu as f64));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum * (-x).exp()
}

fn scaled_i_asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu as f64) * (nu as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// e^{-x} I₀(x) for x ≥ 0.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x > ASYMPTOTIC_FROM {
        scaled_i_asymptotic(0, x)
    } else {
        scaled_i_series(0, x)
    }
}

/// e^{-x} I₁(x) for x ≥ 0.
pub fn bessel_i1_scaled(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_i1_scaled(-x);
    }
    if x > ASYMPTOTIC_FROM {
        scaled_i_asymptotic(1, x)
    } else {
        scaled_i_series(1, x)
    }
}

/// Upper bound on I_{ν+1}(x) / I_ν(x), valid for ν ≥ 0, x > 0.
pub(crate) fn bessel_i_ratio_bound(nu: f64, x: f64) -> f64 {
    let h = nu + 0.5;
    x / (h + (h * h + x * x).sqrt())
}

/// e^{-x} I_k(x) for k = 0..=kmax via Miller's backward recurrence,
/// normalised against the directly computed e^{-x} I₀(x).
pub(crate) fn bessel_i_scaled_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 1e-100 {
        // leading term (x/2)^k / k!; corrections are O(x²)
        let ln_half = (0.5 * x).ln();
        let mut ln_fact = 0.0;
        out[0] = 1.0;
        for (k, v) in out.iter_mut().enumerate().skip(1) {
            ln_fact += (k as f64).ln();
            *v = (k as f64 * ln_half - ln_fact).exp();
        }
        return out;
    }
    let start = kmax + (10.0 * x.sqrt()).ceil() as usize + 60;
    let two_over_x = 2.0 / x;
    let mut above = 0.0; // I_{n+1}
    let mut cur = 1e-280; // I_n
    for n in (1..=start).rev() {
        let below = n as f64 * two_over_x * cur + above;
        above = cur;
        cur = below;
        if n - 1 <= kmax {
            out[n - 1] = cur;
        }
        // one step grows by at most 2n/x < 1e105 for the x handled here
        if cur > 1e150 {
            above *= 1e-150;
            cur *= 1e-150;
            for v in out.iter_mut() {
                *v *= 1e-150;
            }
        }
    }
    let norm = bessel_i0_scaled(x) / out[0];
    for v in out.iter_mut() {
        *v *= norm;
    }
    out
}

/// Coefficients of 1/Γ(z) = Σ c_k z^k (k = 1..=26).
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Returns (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ 1/2, as used by Temme's series.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+μ) = Σ_{k≥1} c_k μ^{k-1}: odd k give the even part (gam2),
    // even k give the odd part, gam1 = −Σ_{k even} c_k μ^{k-2}.
    let mu2 = mu * mu;
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let mut pow = 1.0;
    for pair in RGAMMA.chunks(2) {
        gam2 += pair[0] * pow;
        if let Some(c) = pair.get(1) {
            gam1 -= c * pow;
        }
        pow *= mu2;
    }
    let gampl = gam2 - mu * gam1;
    let gammi = gam2 + mu * gam1;
    (gam1, gam2, gampl, gammi)
}

/// ln K_ν(x) for real ν and x > 0.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_k", format!("argument x = {x} must be positive")));
    }
    if !nu.is_finite() {
        return Err(Error::domain("bessel_k", format!("order {nu} must be finite")));
    }
    const EPS: f64 = 1e-16;
    const MAXIT: usize = 100_000;
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let xmu = nu - nl;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    let (mut kmu, mut k1, mut ln_scale);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                routine: "bessel_k Temme series",
                achieved: f64::NAN,
                requested: EPS,
            });
        }
        kmu = sum;
        k1 = sum1 * xi2;
        ln_scale = 0.0;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                routine: "bessel_k Steed continued fraction",
                achieved: f64::NAN,
                requested: EPS,
            });
        }
        h *= a1;
        ln_scale = 0.5 * (PI / (2.0 * x)).ln() - x - s.ln();
        kmu = 1.0;
        k1 = (xmu + x + 0.5 - h) * xi;
    }

    let steps = nl as usize;
    for i in 1..=steps {
        let next = (xmu + i as f64) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
        if k1 > 1e250 {
            kmu /= k1;
            ln_scale += k1.ln();
            k1 = 1.0;
        }
    }
    Ok(ln_scale + kmu.ln())
}

/// K_ν(x) for x > 0; symmetric in ν. Overflows to ∞ where the true value does.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(ln_bessel_k(nu, x)?.exp())
}

/// L_{1/2}(−x) for x ≥ 0, the half-order Laguerre function that enters the
/// Rician amplitude mean: e^{−x/2} [(1+x) I₀(x/2) + x I₁(x/2)].
pub fn laguerre_half(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(
            "laguerre_half",
            format!("argument {x} must be nonnegative"),
        ));
    }
    let h = 0.5 * x;
    Ok((1.0 + x) * bessel_i0_scaled(h) + x * bessel_i1_scaled(h))
}
