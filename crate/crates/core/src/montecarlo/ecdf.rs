//! Empirical distribution of simulated SNR samples.

use serde::Serialize;

use crate::error::{Error, Result};

pub const QUANTILE_LEVELS: usize = 512;
pub const MIN_SAMPLES: usize = 100;

/// Sorted samples plus a fixed-size quantile table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    #[serde(skip)]
    sorted: Vec<f64>,
    /// Probability levels i/511, i = 0..512.
    pub levels: Vec<f64>,
    pub quantiles: Vec<f64>,
    pub count: usize,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                needed: MIN_SAMPLES,
                got: samples.len(),
            });
        }
        if let Some(bad) = samples.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(
                "EmpiricalCdf::new",
                format!("samples must be finite and nonnegative, got {bad}"),
            ));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let levels: Vec<f64> = (0..QUANTILE_LEVELS)
            .map(|i| i as f64 / (QUANTILE_LEVELS - 1) as f64)
            .collect();
        let quantiles = levels
            .iter()
            .map(|&p| samples[((p * (n - 1) as f64).round() as usize).min(n - 1)])
            .collect();
        Ok(EmpiricalCdf {
            sorted: samples,
            levels,
            quantiles,
            count: n,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples ≤ x.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Sample quantile at probability `p`, read from the sorted samples.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        self.sorted[((p.clamp(0.0, 1.0) * (n - 1) as f64).round() as usize).min(n - 1)]
    }

    /// Kolmogorov–Smirnov distance sup|F_n − F| against a CDF on [0, ∞).
    ///
    /// `cdf` may carry an atom at 0; its left limit there is taken as 0.
    /// Elsewhere it is treated as continuous.
    pub fn ks_distance<F>(&self, mut cdf: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let n = self.sorted.len() as f64;
        let mut d = 0.0f64;
        let mut i = 0usize;
        while i < self.sorted.len() {
            let v = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == v {
                j += 1;
            }
            let f = cdf(v)?;
            let f_left = if v <= 0.0 { 0.0 } else { f };
            d = d.max((f - j as f64 / n).abs()).max((f_left - i as f64 / n).abs());
            i = j;
        }
        Ok(d)
    }

    /// Two-sample Kolmogorov–Smirnov distance.
    pub fn ks_two_sample(&self, other: &EmpiricalCdf) -> f64 {
        let (a, b) = (&self.sorted, &other.sorted);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0usize, 0usize);
        let mut d = 0.0f64;
        while i < a.len() && j < b.len() {
            let v = a[i].min(b[j]);
            while i < a.len() && a[i] <= v {
                i += 1;
            }
            while j < b.len() && b[j] <= v {
                j += 1;
            }
            d = d.max((i as f64 / na - j as f64 / nb).abs());
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn needs_enough_valid_samples() {
        assert!(matches!(
            EmpiricalCdf::new(vec![1.0; 99]),
            Err(Error::InsufficientSamples { needed: 100, got: 99 })
        ));
        let mut v = vec![1.0; 200];
        v[3] = -1.0;
        assert!(EmpiricalCdf::new(v.clone()).is_err());
        v[3] = f64::NAN;
        assert!(EmpiricalCdf::new(v).is_err());
    }

    #[test]
    fn constant_samples_give_a_step() {
        let e = EmpiricalCdf::new(vec![2.5; 300]).unwrap();
        assert_eq!(e.quantiles.len(), QUANTILE_LEVELS);
        assert!(e.quantiles.iter().all(|&q| q == 2.5));
        assert_eq!(e.cdf(2.4999), 0.0);
        assert_eq!(e.cdf(2.5), 1.0);
        // All mass in the atom at zero.
        let z = EmpiricalCdf::new(vec![0.0; 300]).unwrap();
        assert_eq!(z.ks_distance(|_| Ok(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn uniform_draws_pass_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let e = EmpiricalCdf::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap();
        let d = e.ks_distance(|x| Ok(x.clamp(0.0, 1.0))).unwrap();
        assert!(d < 1.36 / (n as f64).sqrt() * 1.5, "{d}");
        assert!((e.quantile(0.5) - 0.5).abs() < 0.01);
    }

    #[test]
    fn atom_at_zero_is_matched() {
        // Half zeros, half Exp(1): F(x) = 0.5 + 0.5(1 − e^{−x}) for x ≥ 0.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 50_000;
        let s: Vec<f64> = (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    0.0
                } else {
                    -(1.0 - rng.random::<f64>()).ln()
                }
            })
            .collect();
        let e = EmpiricalCdf::new(s).unwrap();
        let d = e.ks_distance(|x| Ok(0.5 + 0.5 * (-(-x).exp_m1()))).unwrap();
        assert!(d < 0.01, "{d}");
        // Without the atom the jump at zero shows up in full.
        let d = e.ks_distance(|x| Ok(-(-x).exp_m1())).unwrap();
        assert!(d > 0.45, "{d}");
    }

    #[test]
    fn two_sample_distance() {
        let a = EmpiricalCdf::new((0..1000).map(|i| i as f64).collect()).unwrap();
        let b = EmpiricalCdf::new((0..1000).map(|i| i as f64 + 500.0).collect()).unwrap();
        assert!((a.ks_two_sample(&b) - 0.5).abs() < 1e-12);
        assert_eq!(a.ks_two_sample(&a), 0.0);
    }
}
