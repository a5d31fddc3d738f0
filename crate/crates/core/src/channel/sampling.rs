//! Random channel draws and the instantaneous SNRs they induce.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::array::{array_response, optimal_phase_shifts};
use super::config::SystemConfig;
use crate::error::{Error, Result};

/// How eavesdropper departure angles are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleMode {
    /// Every eavesdropper uses the configured reference direction.
    #[default]
    Locked,
    /// Azimuth follows each eavesdropper's planar position; elevation stays at the reference.
    Geometric,
}

impl std::str::FromStr for AngleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "locked" | "angle-locked" => Ok(AngleMode::Locked),
            "geometric" => Ok(AngleMode::Geometric),
            _ => Err(Error::config(
                "angle_mode",
                format!("{s:?}; expected locked or geometric"),
            )),
        }
    }
}

/// Circularly symmetric unit-variance complex Gaussian.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// √μ·(√(ε/(ε+1))·los + √(1/(ε+1))·w) with w i.i.d. CN(0, 1).
pub fn sample_rician_vector<R: Rng + ?Sized>(mu: f64, eps: f64, los: &[Complex64], rng: &mut R) -> Vec<Complex64> {
    let c_los = (eps / (eps + 1.0)).sqrt();
    let c_nlos = (1.0 / (eps + 1.0)).sqrt();
    let s = mu.sqrt();
    los.iter()
        .map(|a| s * (c_los * a + c_nlos * complex_normal(rng)))
        .collect()
}

/// Homogeneous Poisson points in a disk, returned as (radius, azimuth).
pub fn sample_ppp_disk<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    if !(density >= 0.0) || !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::domain(
            "sample_ppp_disk",
            format!("density={density}, radius={radius}"),
        ));
    }
    let mean = density * PI * radius * radius;
    let count = if mean > 0.0 {
        let pois = Poisson::new(mean).map_err(|e| Error::domain("sample_ppp_disk", e.to_string()))?;
        pois.sample(rng) as usize
    } else {
        0
    };
    Ok((0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let az = 2.0 * PI * rng.random::<f64>();
            (r, az)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EveSample {
    pub radius: f64,
    pub azimuth: f64,
    pub elevation: f64,
    pub h_re: Vec<Complex64>,
}

/// One draw of every channel in the system.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Source-to-surface matrix, N rows by K columns, row-major.
    pub h_sr: Vec<Complex64>,
    pub h_rd: Vec<Complex64>,
    pub eves: Vec<EveSample>,
    pub seed: u64,
}

impl ChannelRealization {
    pub fn sample<R: Rng + ?Sized>(cfg: &SystemConfig, mode: AngleMode, seed: u64, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let (n, k) = (cfg.n_ris, cfg.n_tx);
        let s = cfg.spacing_ratio;
        let a = &cfg.angles;
        let a_n_sr = array_response(n, a.sr_aoa.azimuth, a.sr_aoa.elevation, s)?;
        let a_k_sr = array_response(k, a.sr_aod.azimuth, a.sr_aod.elevation, s)?;
        let amp = cfg.nu().sqrt();
        let mut h_sr = Vec::with_capacity(n * k);
        for an in &a_n_sr {
            for ak in &a_k_sr {
                h_sr.push(amp * an * ak.conj());
            }
        }
        let los_rd = array_response(n, a.rd_aod.azimuth, a.rd_aod.elevation, s)?;
        let h_rd = sample_rician_vector(cfg.mu_d(), cfg.rician_eps, &los_rd, rng);

        let points = sample_ppp_disk(cfg.eve_density, cfg.eve_radius, rng)?;
        let locked = match mode {
            AngleMode::Locked => Some(array_response(n, a.re_aod.azimuth, a.re_aod.elevation, s)?),
            AngleMode::Geometric => None,
        };
        let mut eves = Vec::with_capacity(points.len());
        for (r, az) in points {
            let (azimuth, los) = match &locked {
                Some(los) => (a.re_aod.azimuth, los.clone()),
                None => (az, array_response(n, az, a.re_aod.elevation, s)?),
            };
            let h_re = sample_rician_vector(cfg.mu_e(r), cfg.rician_eps, &los, rng);
            eves.push(EveSample {
                radius: r,
                azimuth,
                elevation: a.re_aod.elevation,
                h_re,
            });
        }
        Ok(ChannelRealization { h_sr, h_rd, eves, seed })
    }
}

/// Reflection phases and unit-norm beamformer for one realization.
#[derive(Debug, Clone)]
pub struct Beamforming {
    pub phases: Vec<f64>,
    pub precoder: Vec<Complex64>,
}

const CONSISTENCY_TOL: f64 = 1e-9;

fn check(quantity: &'static str, full: f64, simple: f64) -> Result<()> {
    let scale = full.abs().max(simple.abs());
    if scale > 0.0 && (full - simple).abs() > CONSISTENCY_TOL * scale {
        return Err(Error::Consistency {
            quantity,
            lhs: full,
            rhs: simple,
        });
    }
    Ok(())
}

/// Row vector x^H·Θ·H_sr for a surface-side channel x.
fn cascaded_row(x: &[Complex64], rot: &[Complex64], h_sr: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut row = vec![Complex64::new(0.0, 0.0); k];
    for (n, (xn, rn)) in x.iter().zip(rot).enumerate() {
        let c = xn.conj() * rn;
        for (acc, h) in row.iter_mut().zip(&h_sr[n * k..(n + 1) * k]) {
            *acc += c * h;
        }
    }
    row
}

impl Beamforming {
    /// Co-phasing reflection and matched-filter precoding toward the user.
    pub fn for_user(cfg: &SystemConfig, real: &ChannelRealization) -> Result<Self> {
        let a = &cfg.angles;
        let a_n_sr = array_response(cfg.n_ris, a.sr_aoa.azimuth, a.sr_aoa.elevation, cfg.spacing_ratio)?;
        let phases = optimal_phase_shifts(&real.h_rd, &a_n_sr)?;
        let rot: Vec<Complex64> = phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let g = cascaded_row(&real.h_rd, &rot, &real.h_sr, cfg.n_tx);
        let norm = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::domain("Beamforming::for_user", "cascaded user channel is zero"));
        }
        let precoder = g.iter().map(|v| v.conj() / norm).collect();
        Ok(Beamforming { phases, precoder })
    }

    fn effective_gain(&self, x: &[Complex64], h_sr: &[Complex64], k: usize) -> f64 {
        let rot: Vec<Complex64> = self.phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let row = cascaded_row(x, &rot, h_sr, k);
        row.iter()
            .zip(&self.precoder)
            .map(|(r, f)| r * f)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// User SNR ρ_d·K·ν·(Σ|h_rd(n)|)², cross-checked against the full cascaded product.
pub fn snr_legit(cfg: &SystemConfig, real: &ChannelRealization) -> Result<f64> {
    let bf = Beamforming::for_user(cfg, real)?;
    snr_legit_with(cfg, real, &bf)
}

fn snr_legit_with(cfg: &SystemConfig, real: &ChannelRealization, bf: &Beamforming) -> Result<f64> {
    let full = bf.effective_gain(&real.h_rd, &real.h_sr, cfg.n_tx);
    let amp: f64 = real.h_rd.iter().map(|h| h.norm()).sum();
    let simple = cfg.n_tx as f64 * cfg.nu() * amp * amp;
    check("legitimate SNR", full, simple)?;
    Ok(cfg.rho_d() * simple)
}

/// SNR of eavesdropper `idx` under the user-optimal configuration, computed as
/// ρ_e·K·ν·|Σ conj(h_re(n))·e^{j∠h_rd(n)}|² and cross-checked against the
/// full cascaded product.
pub fn snr_eve(cfg: &SystemConfig, real: &ChannelRealization, idx: usize) -> Result<f64> {
    let bf = Beamforming::for_user(cfg, real)?;
    snr_eve_with(cfg, real, &bf, idx)
}

fn snr_eve_with(cfg: &SystemConfig, real: &ChannelRealization, bf: &Beamforming, idx: usize) -> Result<f64> {
    let eve = real.eves.get(idx).ok_or_else(|| {
        Error::domain(
            "snr_eve",
            format!("index {idx} out of range for {} eavesdroppers", real.eves.len()),
        )
    })?;
    let full = bf.effective_gain(&eve.h_re, &real.h_sr, cfg.n_tx);
    let z: Complex64 = eve
        .h_re
        .iter()
        .zip(&real.h_rd)
        .map(|(e, d)| {
            let m = d.norm();
            let u = if m > 0.0 { d / m } else { Complex64::new(1.0, 0.0) };
            e.conj() * u
        })
        .sum();
    let simple = cfg.n_tx as f64 * cfg.nu() * z.norm_sqr();
    check("eavesdropper SNR", full, simple)?;
    Ok(cfg.rho_e() * simple)
}

/// User SNR and every eavesdropper SNR for one realization.
pub fn evaluate_snrs(cfg: &SystemConfig, real: &ChannelRealization) -> Result<(f64, Vec<f64>)> {
    let bf = Beamforming::for_user(cfg, real)?;
    let gd = snr_legit_with(cfg, real, &bf)?;
    let ge = (0..real.eves.len())
        .map(|i| snr_eve_with(cfg, real, &bf, i))
        .collect::<Result<Vec<_>>>()?;
    Ok((gd, ge))
}
