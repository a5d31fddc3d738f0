//! Planar array response and the reflection phases that co-phase the user link.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Response of a √z × √z uniform planar array toward (azimuth, elevation).
///
/// Element n sits at planar index (x, y) with n = x·√z + y; its entry is
/// exp(j2π·(d/λ)·(x·sin az·sin el + y·cos el)).
pub fn array_response(z: usize, azimuth: f64, elevation: f64, spacing_ratio: f64) -> Result<Vec<Complex64>> {
    let side = (z as f64).sqrt().round() as usize;
    if z == 0 || side * side != z {
        return Err(Error::config(
            "array size",
            format!("{z} is not a positive perfect square"),
        ));
    }
    let kx = 2.0 * PI * spacing_ratio * azimuth.sin() * elevation.sin();
    let ky = 2.0 * PI * spacing_ratio * elevation.cos();
    let mut out = Vec::with_capacity(z);
    for x in 0..side {
        for y in 0..side {
            out.push(Complex64::from_polar(1.0, kx * x as f64 + ky * y as f64));
        }
    }
    Ok(out)
}

/// Reflection phases θ_n = −∠(conj(h_rd(n))·a_sr(n)), wrapped to [0, 2π).
/// A zero product gets phase 0.
pub fn optimal_phase_shifts(h_rd: &[Complex64], a_n_sr: &[Complex64]) -> Result<Vec<f64>> {
    if h_rd.len() != a_n_sr.len() {
        return Err(Error::domain(
            "optimal_phase_shifts",
            format!("length mismatch: {} vs {}", h_rd.len(), a_n_sr.len()),
        ));
    }
    Ok(h_rd
        .iter()
        .zip(a_n_sr)
        .map(|(h, a)| {
            let c = h.conj() * a;
            if c.norm_sqr() == 0.0 {
                0.0
            } else {
                (-c.arg()).rem_euclid(2.0 * PI)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element() {
        let a = array_response(1, 0.4, 1.1, 0.5).unwrap();
        assert_eq!(a, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn two_by_two_broadside() {
        let a = array_response(4, 0.0, 0.0, 0.5).unwrap();
        let want = [1.0, -1.0, 1.0, -1.0];
        for (got, w) in a.iter().zip(want) {
            assert!((got - Complex64::new(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn unit_modulus() {
        let a = array_response(16, PI / 4.0, PI / 3.0, 0.5).unwrap();
        assert!(a.iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn rejects_non_square() {
        assert!(array_response(15, 0.0, 0.0, 0.5).is_err());
        assert!(array_response(0, 0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn aligned_inputs_need_no_rotation() {
        let ones = vec![Complex64::new(1.0, 0.0); 9];
        assert!(optimal_phase_shifts(&ones, &ones).unwrap().iter().all(|&t| t == 0.0));
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        assert_eq!(optimal_phase_shifts(&zero, &ones[..2]).unwrap(), vec![0.0, 0.0]);
        assert!(optimal_phase_shifts(&ones[..3], &ones).is_err());
    }
}
