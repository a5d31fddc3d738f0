//! Trial engine for the secrecy outage probability.

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ecdf::EmpiricalCdf;
use crate::channel::{
    array_response, complex_normal, evaluate_snrs, sample_ppp_disk, sample_rician_vector, AngleMode,
    ChannelRealization, SystemConfig,
};
use crate::error::{Error, Result};
use crate::sop::{config_hash, SopMethod, SopResult};

const BLOCK: u64 = 4096;

/// Which per-trial SNR samples to keep. The outage estimate is always produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Collect {
    pub gamma_d: bool,
    pub gamma_e: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPlan {
    pub trials: u64,
    pub master_seed: u64,
    pub angle_mode: AngleMode,
    pub collect: Collect,
    /// Build every channel matrix and evaluate the SNRs through the full
    /// cascaded product instead of the per-trial sufficient statistics.
    pub full_channel: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl McPlan {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        McPlan {
            trials,
            master_seed,
            angle_mode: AngleMode::Locked,
            collect: Collect::default(),
            full_channel: false,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EmpiricalCdfs {
    pub gamma_d: Option<EmpiricalCdf>,
    pub gamma_e: Option<EmpiricalCdf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub sop_hat: f64,
    /// 1.96·√(p̂(1−p̂)/n).
    pub ci95_halfwidth: f64,
    /// 3/n when p̂ is 0 or 1, where the normal interval collapses.
    pub zero_event_bound: Option<f64>,
    pub trials: u64,
    pub outages: u64,
    pub master_seed: u64,
    pub empirical_cdfs: EmpiricalCdfs,
    pub runtime_s: f64,
}

impl McReport {
    /// Two-sided 95% interval clamped to [0, 1].
    pub fn interval(&self) -> (f64, f64) {
        let h = self.zero_event_bound.unwrap_or(self.ci95_halfwidth);
        ((self.sop_hat - h).max(0.0), (self.sop_hat + h).min(1.0))
    }

    pub fn to_sop_result(&self, cfg: &SystemConfig, plan: &McPlan) -> SopResult {
        let hash = config_hash(&("run_mc", cfg, plan));
        SopResult::new(
            self.sop_hat,
            SopMethod::Mc,
            self.zero_event_bound.unwrap_or(self.ci95_halfwidth),
            hash,
        )
    }
}

/// Generator for trial `index`: ChaCha8 keyed by the master seed, with the
/// trial index as stream id.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Per-configuration constants for the fast trial path.
struct Kernel<'a> {
    cfg: &'a SystemConfig,
    mode: AngleMode,
    los_rd: Vec<Complex64>,
    los_re: Vec<Complex64>,
    gain: f64,
    c_los: f64,
    c_nlos_sqrt_n: f64,
}

impl<'a> Kernel<'a> {
    fn new(cfg: &'a SystemConfig, mode: AngleMode) -> Result<Self> {
        let a = &cfg.angles;
        let s = cfg.spacing_ratio;
        let eps = cfg.rician_eps;
        Ok(Kernel {
            cfg,
            mode,
            los_rd: array_response(cfg.n_ris, a.rd_aod.azimuth, a.rd_aod.elevation, s)?,
            los_re: array_response(cfg.n_ris, a.re_aod.azimuth, a.re_aod.elevation, s)?,
            gain: cfg.n_tx as f64 * cfg.nu(),
            c_los: (eps / (eps + 1.0)).sqrt(),
            c_nlos_sqrt_n: (cfg.n_ris as f64 / (eps + 1.0)).sqrt(),
        })
    }

    /// Unit co-phasing vector u_n = h_rd(n)/|h_rd(n)| and the user SNR.
    fn user(&self, rng: &mut ChaCha8Rng) -> (Vec<Complex64>, f64) {
        let h_rd = sample_rician_vector(self.cfg.mu_d(), self.cfg.rician_eps, &self.los_rd, rng);
        let mut amp = 0.0;
        let u = h_rd
            .iter()
            .map(|h| {
                let m = h.norm();
                amp += m;
                if m > 0.0 {
                    h / m
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect();
        (u, self.cfg.rho_d() * self.gain * amp * amp)
    }

    /// Σ conj(a(n))·u_n for the eavesdropper steering vector.
    fn projection(&self, u: &[Complex64], azimuth: f64) -> Result<Complex64> {
        let dot = |a: &[Complex64]| a.iter().zip(u).map(|(a, u)| a.conj() * u).sum();
        match self.mode {
            AngleMode::Locked => Ok(dot(&self.los_re)),
            AngleMode::Geometric => {
                let el = self.cfg.angles.re_aod.elevation;
                Ok(dot(&array_response(
                    self.cfg.n_ris,
                    azimuth,
                    el,
                    self.cfg.spacing_ratio,
                )?))
            }
        }
    }

    /// SNR of one eavesdropper at radius r given the user's co-phasing vector.
    ///
    /// With h_re = √μ(c·a + c'·w), w ~ CN(0, I) independent of u, the sum
    /// Σ conj(w_n)·u_n is CN(0, N), so only its scalar value is drawn.
    fn eve(&self, projection: Complex64, r: f64, rng: &mut ChaCha8Rng) -> f64 {
        let g = complex_normal(rng);
        let z = self.cfg.mu_e(r).sqrt() * (self.c_los * projection + self.c_nlos_sqrt_n * g);
        self.cfg.rho_e() * self.gain * z.norm_sqr()
    }

    /// User SNR and strongest eavesdropper SNR (0 when there is none).
    fn trial(&self, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
        let (u, gd) = self.user(rng);
        let points = sample_ppp_disk(self.cfg.eve_density, self.cfg.eve_radius, rng)?;
        let locked = match (self.mode, points.is_empty()) {
            (AngleMode::Locked, false) => Some(self.projection(&u, 0.0)?),
            _ => None,
        };
        let mut ge = 0.0f64;
        for (r, az) in points {
            let m = match locked {
                Some(m) => m,
                None => self.projection(&u, az)?,
            };
            ge = ge.max(self.eve(m, r, rng));
        }
        Ok((gd, ge))
    }
}

fn full_channel_trial(cfg: &SystemConfig, mode: AngleMode, index: u64, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let real = ChannelRealization::sample(cfg, mode, index, rng)?;
    let (gd, ge) = evaluate_snrs(cfg, &real)?;
    Ok((gd, ge.into_iter().fold(0.0, f64::max)))
}

fn is_outage(gd: f64, ge: f64, c_th: f64) -> bool {
    gd.ln_1p() - ge.ln_1p() < c_th
}

struct Block {
    outages: u64,
    gamma_d: Vec<f64>,
    gamma_e: Vec<f64>,
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::config("workers", e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Monte-Carlo estimate of the secrecy outage probability.
///
/// Trial i draws from `trial_rng(master_seed, i)`, so the report does not
/// depend on the worker count.
pub fn run_mc(cfg: &SystemConfig, plan: &McPlan) -> Result<McReport> {
    cfg.validate()?;
    plan.validate()?;
    let start = Instant::now();
    let kernel = Kernel::new(cfg, plan.angle_mode)?;
    let n_blocks = plan.trials.div_ceil(BLOCK);
    let run_block = |b: u64| -> Result<Block> {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(plan.trials);
        let cap = (hi - lo) as usize;
        let mut out = Block {
            outages: 0,
            gamma_d: Vec::with_capacity(if plan.collect.gamma_d { cap } else { 0 }),
            gamma_e: Vec::with_capacity(if plan.collect.gamma_e { cap } else { 0 }),
        };
        for i in lo..hi {
            let mut rng = trial_rng(plan.master_seed, i);
            let (gd, ge) = if plan.full_channel {
                full_channel_trial(cfg, plan.angle_mode, i, &mut rng)?
            } else {
                kernel.trial(&mut rng)?
            };
            out.outages += is_outage(gd, ge, cfg.c_th) as u64;
            if plan.collect.gamma_d {
                out.gamma_d.push(gd);
            }
            if plan.collect.gamma_e {
                out.gamma_e.push(ge);
            }
        }
        Ok(out)
    };
    let blocks: Vec<Block> = in_pool(plan.workers, || {
        (0..n_blocks).into_par_iter().map(run_block).collect::<Result<Vec<_>>>()
    })??;

    let outages: u64 = blocks.iter().map(|b| b.outages).sum();
    let n = plan.trials as f64;
    let p = outages as f64 / n;
    let collect = |pick: fn(&Block) -> &Vec<f64>, on: bool| -> Result<Option<EmpiricalCdf>> {
        if !on {
            return Ok(None);
        }
        let all: Vec<f64> = blocks.iter().flat_map(|b| pick(b).iter().copied()).collect();
        EmpiricalCdf::new(all).map(Some)
    };
    let empirical_cdfs = EmpiricalCdfs {
        gamma_d: collect(|b| &b.gamma_d, plan.collect.gamma_d)?,
        gamma_e: collect(|b| &b.gamma_e, plan.collect.gamma_e)?,
    };
    Ok(McReport {
        sop_hat: p,
        ci95_halfwidth: 1.96 * (p * (1.0 - p) / n).sqrt(),
        zero_event_bound: (outages == 0 || outages == plan.trials).then(|| 3.0 / n),
        trials: plan.trials,
        outages,
        master_seed: plan.master_seed,
        empirical_cdfs,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// SNR samples of a single eavesdropper at planar radius `radius` under the
/// user-optimal surface configuration, one per trial.
///
/// In geometric mode the azimuth is drawn uniformly per trial.
pub fn sample_single_eve_snr(
    cfg: &SystemConfig,
    mode: AngleMode,
    radius: f64,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::config("radius", format!("{radius} must be positive and finite")));
    }
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let kernel = Kernel::new(cfg, mode)?;
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            let (u, _) = kernel.user(&mut rng);
            let az = match mode {
                AngleMode::Locked => 0.0,
                AngleMode::Geometric => 2.0 * std::f64::consts::PI * rand::Rng::random::<f64>(&mut rng),
            };
            let m = kernel.projection(&u, az)?;
            Ok(kernel.eve(m, radius, &mut rng))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(trials: u64, seed: u64) -> McPlan {
        McPlan::new(trials, seed)
    }

    #[test]
    fn rejects_empty_plan() {
        let cfg = SystemConfig::fig3(16, 4);
        assert!(matches!(run_mc(&cfg, &plan(0, 1)), Err(Error::Config { .. })));
        let mut p = plan(10, 1);
        p.workers = Some(0);
        assert!(run_mc(&cfg, &p).is_err());
    }

    #[test]
    fn no_eavesdroppers_and_zero_rate_never_outage() {
        let mut cfg = SystemConfig::fig3(16, 4).with_rho_d_db(10.0);
        cfg.eve_density = 0.0;
        cfg.c_th = 0.0;
        let r = run_mc(&cfg, &plan(5000, 3)).unwrap();
        assert_eq!(r.sop_hat, 0.0);
        assert_eq!(r.ci95_halfwidth, 0.0);
        assert_eq!(r.zero_event_bound, Some(3.0 / 5000.0));
    }

    #[test]
    fn vanishing_user_link_always_outage() {
        let cfg = SystemConfig::fig3(16, 4).with_rho_d_db(-120.0);
        let r = run_mc(&cfg, &plan(5000, 3)).unwrap();
        assert_eq!(r.sop_hat, 1.0);
    }

    #[test]
    fn reproducible_across_worker_counts() {
        let cfg = SystemConfig::fig3(16, 4).with_rho_d_db(79.0);
        let mut p = plan(10_000, 99);
        p.collect = Collect {
            gamma_d: true,
            gamma_e: true,
        };
        p.workers = Some(1);
        let a = run_mc(&cfg, &p).unwrap();
        p.workers = Some(3);
        let b = run_mc(&cfg, &p).unwrap();
        assert_eq!(a.outages, b.outages);
        assert_eq!(a.sop_hat.to_bits(), b.sop_hat.to_bits());
        assert_eq!(a.empirical_cdfs, b.empirical_cdfs);
        assert!(a.sop_hat > 0.05 && a.sop_hat < 0.95, "{}", a.sop_hat);
        p.master_seed = 100;
        assert_ne!(run_mc(&cfg, &p).unwrap().outages, a.outages);
    }

    #[test]
    fn ci_formula() {
        let cfg = SystemConfig::fig3(16, 4).with_rho_d_db(79.0);
        let r = run_mc(&cfg, &plan(4000, 8)).unwrap();
        let p = r.outages as f64 / 4000.0;
        assert_eq!(r.sop_hat, p);
        assert_eq!(r.ci95_halfwidth, 1.96 * (p * (1.0 - p) / 4000.0).sqrt());
        assert!(r.zero_event_bound.is_none());
        let s = r.to_sop_result(&cfg, &plan(4000, 8));
        assert_eq!(s.method, SopMethod::Mc);
        assert_eq!(s.value, p);
    }

    #[test]
    fn fast_path_matches_full_channel_in_distribution() {
        for mode in [AngleMode::Locked, AngleMode::Geometric] {
            let mut cfg = SystemConfig::fig3(16, 4).with_rho_d_db(79.0);
            cfg.eve_radius = 60.0;
            let mut p = plan(20_000, 17);
            p.angle_mode = mode;
            p.collect = Collect {
                gamma_d: true,
                gamma_e: true,
            };
            let fast = run_mc(&cfg, &p).unwrap();
            p.full_channel = true;
            p.master_seed = 18;
            let full = run_mc(&cfg, &p).unwrap();
            // Two-sample KS at n = m = 2·10⁴: 1% critical value 1.63·√(2/n).
            let crit = 1.63 * (2.0 / 20_000.0f64).sqrt();
            for (a, b) in [
                (&fast.empirical_cdfs.gamma_d, &full.empirical_cdfs.gamma_d),
                (&fast.empirical_cdfs.gamma_e, &full.empirical_cdfs.gamma_e),
            ] {
                let d = a.as_ref().unwrap().ks_two_sample(b.as_ref().unwrap());
                assert!(d < crit, "{mode:?}: {d} vs {crit}");
            }
            let tol = 3.0 * (fast.ci95_halfwidth.powi(2) + full.ci95_halfwidth.powi(2)).sqrt();
            assert!((fast.sop_hat - full.sop_hat).abs() < tol, "{mode:?}");
        }
    }

    #[test]
    fn single_eve_sampler_is_seeded() {
        let cfg = SystemConfig::fig3(16, 4);
        let a = sample_single_eve_snr(&cfg, AngleMode::Locked, 50.0, 300, 4).unwrap();
        let b = sample_single_eve_snr(&cfg, AngleMode::Locked, 50.0, 300, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| *v >= 0.0 && v.is_finite()));
        assert!(sample_single_eve_snr(&cfg, AngleMode::Locked, 0.0, 300, 4).is_err());
    }
}
