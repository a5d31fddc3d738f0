//! Oracle suite run by `ris-secrecy selftest`.
//!
//! Every check measures an error and compares it with a tolerance. Checks
//! whose failure is an understood property of the analytic model are marked
//! as known deviations and do not fail the suite.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytic::{
    cdf_gamma_d, eve_aggregate_cdf_closed, eve_aggregate_cdf_closed_infinite, eve_aggregate_cdf_exact,
    eve_aggregate_pdf, eve_aggregate_pdf_infinite, eve_model, eve_model_with, eve_pointwise_cdf, legit_model,
    pdf_gamma_d, EveCdfForm, EveSnrModel, LegitSnrModel,
};
use crate::channel::{
    array_response, evaluate_snrs, optimal_phase_shifts, sample_ppp_disk, sample_rician_vector, AngleMode,
    ChannelRealization, RationalExponent, SystemConfig,
};
use crate::error::Result;
use crate::montecarlo::{run_mc, sample_single_eve_snr, Collect, EmpiricalCdf, McPlan};
use crate::quad::{integrate, integrate_to_infinity, integrate_with_breaks, QuadOptions};
use crate::sop::{
    diversity_order_estimate, sop_alpha2_freespace, sop_alpha4_urban, sop_asymptotic_raw, sop_closed, sop_quadrature,
    sop_quadrature_with, sop_two_term_expansion, OutageKernel,
};
use crate::special::{
    bessel_k, gamma, laguerre_half, ln_gamma, lower_incomplete_gamma, marcum_q1, marcum_q1_poly_approx_with,
    meijer_contour, meijer_g_m0_0m, meijer_series, upper_incomplete_gamma, MarcumPolyCoeffs, MeijerGRestricted,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Fails for a documented modelling reason; reported, not counted.
    KnownDeviation,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub status: Status,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub runtime_s: f64,
}

impl SelftestReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

#[derive(Debug, Clone)]
pub struct SelftestOptions {
    /// Surrogate Marcum coefficients fed to every check that uses them.
    pub coeffs: MarcumPolyCoeffs,
    pub mc_trials: u64,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            coeffs: MarcumPolyCoeffs::STANDARD,
            mc_trials: 100_000,
            seed: 20_240_601,
        }
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, module: &'static str, name: impl Into<String>, measured: Result<f64>, tolerance: f64) {
        let name = name.into();
        let check = match measured {
            Ok(m) => Check {
                module,
                name,
                measured: m,
                tolerance,
                status: if m <= tolerance { Status::Pass } else { Status::Fail },
                note: String::new(),
            },
            Err(e) => Check {
                module,
                name,
                measured: f64::NAN,
                tolerance,
                status: Status::Fail,
                note: e.to_string(),
            },
        };
        self.checks.push(check);
    }

    /// A yes/no property, recorded as measured 0 (holds) or 1 (violated).
    fn holds(&mut self, module: &'static str, name: impl Into<String>, ok: Result<bool>) {
        self.record(module, name, ok.map(|b| if b { 0.0 } else { 1.0 }), 0.0);
    }

    fn known_deviation(
        &mut self,
        module: &'static str,
        name: impl Into<String>,
        measured: Result<f64>,
        tolerance: f64,
        note: &str,
    ) {
        self.record(module, name, measured, tolerance);
        let last = self.checks.last_mut().unwrap();
        if last.status == Status::Fail && last.measured.is_finite() {
            last.status = Status::KnownDeviation;
            last.note = note.to_string();
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_over<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    let mut m = 0.0f64;
    for v in it {
        m = m.max(v?);
    }
    Ok(m)
}

fn models(cfg: &SystemConfig) -> Result<(LegitSnrModel, EveSnrModel)> {
    Ok((legit_model(cfg)?, eve_model(cfg)?))
}

/// 1F1(−½; 1; −x) = e^{−x}·1F1(3/2; 1; x), a series of positive terms.
fn laguerre_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..1000 {
        let nf = n as f64;
        term *= (nf + 1.5) * x / ((nf + 1.0) * (nf + 1.0));
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    (-x).exp() * sum
}

fn special_functions(s: &mut Suite, coeffs: &MarcumPolyCoeffs) {
    const M: &str = "special_functions";
    s.record(
        M,
        "laguerre_half(0) = 1",
        laguerre_half(0.0).map(|v| (v - 1.0).abs()),
        0.0,
    );
    s.record(
        M,
        "laguerre_half(2) vs hypergeometric series",
        laguerre_half(2.0).map(|v| rel(v, laguerre_series(2.0))),
        1e-12,
    );
    s.record(
        M,
        "laguerre_half vs series on [0, 20]",
        max_over(
            (0..=40)
                .map(|i| 0.5 * i as f64)
                .map(|x| laguerre_half(x).map(|v| rel(v, laguerre_series(x)))),
        ),
        1e-12,
    );
    s.holds(
        M,
        "laguerre_half(10) > laguerre_half(2)",
        laguerre_half(10.0).and_then(|a| Ok(a > laguerre_half(2.0)?)),
    );

    s.record(
        M,
        "lower gamma(1, x) = 1 - e^-x",
        max_over([0.5, 1.0, 2.0].map(|x| lower_incomplete_gamma(1.0, x).map(|v| rel(v, -(-x).exp_m1())))),
        1e-14,
    );
    s.record(M, "lower gamma(k, 0) = 0", lower_incomplete_gamma(3.7, 0.0), 0.0);
    for (a, x) in [(2.5, 3.0), (3.2, 5.0)] {
        let sum = lower_incomplete_gamma(a, x).and_then(|l| Ok(l + upper_incomplete_gamma(a, x)?));
        s.record(
            M,
            format!("lower + upper gamma({a}, {x}) = Gamma({a})"),
            sum.map(|v| rel(v, gamma(a))),
            1e-12,
        );
    }
    s.record(
        M,
        "upper gamma(a, 0) = Gamma(a)",
        upper_incomplete_gamma(4.3, 0.0).map(|v| rel(v, gamma(4.3))),
        1e-14,
    );

    s.record(
        M,
        "Q1(a, 0) = 1",
        max_over([0.0, 1.0, 5.0].map(|a| marcum_q1(a, 0.0).map(|v| (v - 1.0).abs()))),
        0.0,
    );
    s.record(
        M,
        "Q1(0, b) = exp(-b^2/2)",
        max_over([1.0, 2.0].map(|b: f64| marcum_q1(0.0, b).map(|v| rel(v, (-0.5 * b * b).exp())))),
        1e-14,
    );
    let q11 = integrate_to_infinity(
        |x| x * (-0.5 * (x - 1.0) * (x - 1.0)).exp() * crate::special::bessel_i0_scaled(x),
        1.0,
        QuadOptions::new(1e-15, 1e-13),
    );
    s.record(
        M,
        "Q1(1, 1) vs direct integral",
        q11.and_then(|q| Ok((marcum_q1(1.0, 1.0)? - q.value).abs())),
        1e-10,
    );
    s.holds(
        M,
        "Q1 decreasing in b",
        (|| {
            for a in [0.0, 0.7, 3.0] {
                let mut last = 1.0;
                for i in 0..60 {
                    let q = marcum_q1(a, 0.1 * i as f64)?;
                    if q > last {
                        return Ok(false);
                    }
                    last = q;
                }
            }
            Ok(true)
        })(),
    );
    s.record(
        M,
        "surrogate Q1(1, 2) vs exact",
        marcum_q1(1.0, 2.0).map(|q| (marcum_q1_poly_approx_with(1.0, 2.0, coeffs) - q).abs()),
        0.05,
    );
    // Direct evaluation of the printed quartics at (0.5, 0.5).
    s.record(
        M,
        "surrogate Q1(0.5, 0.5) regression value",
        Ok((marcum_q1_poly_approx_with(0.5, 0.5, coeffs) - 8.99785723483034872e-1).abs()),
        1e-15,
    );
    s.record(
        M,
        "surrogate Q1(a, 0) = 1",
        Ok((marcum_q1_poly_approx_with(1.3, 0.0, coeffs) - 1.0).abs()),
        0.0,
    );

    s.record(
        M,
        "K_1/2 closed form",
        max_over([0.5, 1.0, 3.0].map(|x: f64| bessel_k(0.5, x).map(|k| rel(k, (PI / (2.0 * x)).sqrt() * (-x).exp())))),
        1e-13,
    );
    s.record(
        M,
        "K recurrence",
        max_over([(0.3, 0.8), (2.5, 4.0), (17.2, 9.0)].map(|(nu, x): (f64, f64)| {
            let (a, b, c) = (bessel_k(nu - 1.0, x)?, bessel_k(nu, x)?, bessel_k(nu + 1.0, x)?);
            Ok(rel(c, a + 2.0 * nu / x * b))
        })),
        1e-10,
    );
    let k2 = integrate(
        |t: f64| (-(t.cosh())).exp() * (2.0 * t).cosh(),
        0.0,
        40.0,
        QuadOptions::new(1e-16, 1e-13),
    );
    s.record(
        M,
        "K_2(1) vs integral representation",
        k2.and_then(|q| Ok(rel(bessel_k(2.0, 1.0)?, q.value))),
        1e-9,
    );

    s.record(
        M,
        "G^{1,0}_{0,1}(z | 0) = e^-z",
        max_over([0.1, 1.0, 5.0].map(|z: f64| {
            let g = MeijerGRestricted::new(vec![0.0], z)?;
            Ok(rel(meijer_g_m0_0m(&g)?, (-z).exp()))
        })),
        1e-10,
    );
    s.record(
        M,
        "G^{2,0}_{0,2}(z | 1/2, -1/2) = 2 K_1(2 sqrt z)",
        (|| {
            let g = MeijerGRestricted::new(vec![0.5, -0.5], 0.25)?;
            Ok(rel(meijer_g_m0_0m(&g)?, 2.0 * bessel_k(1.0, 1.0)?))
        })(),
        1e-9,
    );
    s.record(
        M,
        "Meijer series vs contour on the overlap band",
        max_over([0.3, 0.7, 1.5, 3.0].into_iter().flat_map(|z| {
            [vec![0.1, 0.45, 0.8], vec![0.5, 1.25, 7.3, 0.9]]
                .into_iter()
                .map(move |b| {
                    let g = MeijerGRestricted::new(b, z)?;
                    let (a, c) = (meijer_series(&g, 1e-10)?, meijer_contour(&g, 1e-10)?);
                    Ok(rel(a.value(), c.value()))
                })
        })),
        1e-8,
    );
}

fn channel_model(s: &mut Suite, seed: u64) {
    const M: &str = "channel_model";
    s.record(
        M,
        "array_response(4, 0, 0, 1/2) = [1, -1, 1, -1]",
        array_response(4, 0.0, 0.0, 0.5).map(|a| {
            let want = [1.0, -1.0, 1.0, -1.0];
            a.iter()
                .zip(want)
                .map(|(v, w)| (v - Complex64::new(w, 0.0)).norm())
                .fold(0.0, f64::max)
        }),
        1e-15,
    );
    s.record(
        M,
        "array_response unit modulus",
        array_response(16, PI / 4.0, PI / 3.0, 0.5)
            .map(|a| a.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)),
        1e-15,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = SystemConfig::fig3(16, 4);
    s.holds(
        M,
        "co-phasing beats 1000 random phase sets",
        (|| {
            let a = array_response(16, 0.3, 1.1, 0.5)?;
            for _ in 0..20 {
                let h = sample_rician_vector(1.0, 2.0, &a, &mut rng);
                let a_sr = array_response(16, cfg.angles.sr_aoa.azimuth, cfg.angles.sr_aoa.elevation, 0.5)?;
                let gain = |th: &[f64]| {
                    h.iter()
                        .zip(&a_sr)
                        .zip(th)
                        .map(|((h, a), t)| Complex64::from_polar(1.0, *t) * h.conj() * a)
                        .sum::<Complex64>()
                        .norm()
                };
                let best = gain(&optimal_phase_shifts(&h, &a_sr)?);
                if (best - h.iter().map(|v| v.norm()).sum::<f64>()).abs() > 1e-10 * best {
                    return Ok(false);
                }
                for _ in 0..1000 {
                    let th: Vec<f64> = (0..16).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
                    if gain(&th) > best {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })(),
    );
    s.holds(
        M,
        "cascaded and simplified SNRs agree on 200 draws",
        (|| {
            for (i, mode) in (0..200u64).zip([AngleMode::Locked, AngleMode::Geometric].iter().cycle()) {
                let mut r = ChaCha8Rng::seed_from_u64(seed ^ i);
                let real = ChannelRealization::sample(&SystemConfig::fig3(16, 4), *mode, i, &mut r)?;
                evaluate_snrs(&SystemConfig::fig3(16, 4), &real)?;
            }
            Ok(true)
        })(),
    );
    let draws = 10_000;
    let mean = (0..draws)
        .map(|_| sample_ppp_disk(1e-3, 200.0, &mut rng).map(|p| p.len() as f64))
        .sum::<Result<f64>>()
        .map(|t| t / draws as f64);
    let want = 1e-3 * PI * 200.0 * 200.0;
    s.record(
        M,
        "PPP mean count in standard errors",
        mean.map(|m| (m - want).abs() / (want / draws as f64).sqrt()),
        3.0,
    );
    s.record(
        M,
        "Rayleigh power E|h|^2 = mu in standard errors",
        (|| {
            let los = vec![Complex64::new(1.0, 0.0); 1];
            let n = 100_000;
            let p: Vec<f64> = (0..n)
                .map(|_| sample_rician_vector(2.0, 0.0, &los, &mut rng)[0].norm_sqr())
                .collect();
            let m = p.iter().sum::<f64>() / n as f64;
            let sd = (p.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt();
            Ok((m - 2.0).abs() / (sd / (n as f64).sqrt()))
        })(),
        3.0,
    );
}

fn analytic_distributions(s: &mut Suite, coeffs: &MarcumPolyCoeffs, opts: &SelftestOptions) {
    const M: &str = "analytic_distributions";
    let mut rayleigh = SystemConfig::fig3(16, 4);
    rayleigh.rician_eps = 0.0;
    s.record(
        M,
        "Rayleigh gamma shape = N(pi/4)/(1-pi/4)",
        legit_model(&rayleigh).map(|m| rel(m.gamma_shape, 16.0 * (PI / 4.0) / (1.0 - PI / 4.0))),
        1e-13,
    );
    s.holds(
        M,
        "gamma shape independent of K",
        (|| {
            Ok(legit_model(&SystemConfig::fig3(64, 4))?.gamma_shape
                == legit_model(&SystemConfig::fig3(64, 64))?.gamma_shape)
        })(),
    );
    let small = SystemConfig::fig3(1, 1);
    s.record(
        M,
        "user pdf integrates to 1",
        (|| {
            let l = legit_model(&small)?;
            let scale = l.mean_snr();
            let r = integrate_with_breaks(
                |u: f64| {
                    let x = scale * u.exp();
                    pdf_gamma_d(&l, x).unwrap_or(f64::NAN) * x
                },
                -40.0,
                8.0,
                &[-10.0, -3.0, -1.0, 0.0, 1.0, 3.0],
                QuadOptions::new(1e-13, 1e-12),
            )?;
            Ok((r.value - 1.0).abs())
        })(),
        1e-6,
    );
    s.record(
        M,
        "user pdf vs finite difference at x = theta^2 rho",
        (|| {
            let l = legit_model(&small)?;
            let x = l.gamma_scale * l.gamma_scale * l.rho_d;
            let h = 1e-5 * x;
            let fd = (cdf_gamma_d(&l, x + h)? - cdf_gamma_d(&l, x - h)?) / (2.0 * h);
            Ok(rel(pdf_gamma_d(&l, x)?, fd))
        })(),
        1e-6,
    );

    let mut near = SystemConfig::fig3(16, 4);
    near.eve_radius = 20.0;
    s.record(
        M,
        "exact PGFL void probability as x -> 0",
        eve_model_with(&near, coeffs)
            .and_then(|m| Ok((eve_aggregate_cdf_exact(&m, 1e-30)? - m.void_probability()).abs())),
        1e-9,
    );
    let mut empty = near.clone();
    empty.eve_density = 0.0;
    s.record(
        M,
        "no eavesdroppers: aggregate CDF = 1",
        eve_model_with(&empty, coeffs).and_then(|m| {
            max_over([1e-9, 1e-6, 1.0].map(|x| {
                Ok((eve_aggregate_cdf_exact(&m, x)? - 1.0)
                    .abs()
                    .max((eve_aggregate_cdf_closed(&m, x)? - 1.0).abs()))
            }))
        }),
        0.0,
    );
    let fig3 = SystemConfig::fig3(64, 16);
    s.record(
        M,
        "surrogate vs exact aggregate CDF at x in {1, 10, 100}",
        eve_model_with(&fig3, coeffs).and_then(|m| {
            max_over(
                [1.0, 10.0, 100.0]
                    .map(|x| Ok((eve_aggregate_cdf_closed(&m, x)? - eve_aggregate_cdf_exact(&m, x)?).abs())),
            )
        }),
        0.02,
    );
    s.record(
        M,
        "surrogate vs exact aggregate CDF across its bulk",
        eve_model_with(&fig3, coeffs).and_then(|m| {
            let s0 = bulk_scale(&m);
            max_over(
                (0..60)
                    .map(|i| s0 * 10f64.powf(-2.0 + 5.0 * i as f64 / 59.0))
                    .map(|x| Ok((eve_aggregate_cdf_closed(&m, x)? - eve_aggregate_cdf_exact(&m, x)?).abs())),
            )
        }),
        0.02,
    );
    s.record(
        M,
        "aggregate pdf vs finite difference (20 points)",
        eve_model_with(&fig3, coeffs).and_then(|m| {
            let s0 = bulk_scale(&m);
            max_over((0..20).map(|i| s0 * 10f64.powf(-0.5 + 2.0 * i as f64 / 19.0)).map(|x| {
                let h = 1e-5 * x;
                let fd = (eve_aggregate_cdf_closed(&m, x + h)? - eve_aggregate_cdf_closed(&m, x - h)?) / (2.0 * h);
                Ok(rel(eve_aggregate_pdf(&m, x)?, fd))
            }))
        }),
        1e-5,
    );
    s.record(
        M,
        "unbounded-plane pdf integrates to 1",
        eve_model_with(&fig3, coeffs).and_then(|m| {
            let s0 = bulk_scale(&m);
            let r = integrate(
                |u: f64| {
                    let x = s0 * u.exp();
                    eve_aggregate_pdf_infinite(&m, x).unwrap_or(f64::NAN) * x
                },
                -12.0,
                60.0,
                QuadOptions::new(1e-13, 1e-12),
            )?;
            Ok((r.value - 1.0).abs())
        }),
        1e-5,
    );
    s.record(
        M,
        "finite and unbounded closed CDFs agree where the tail is negligible",
        eve_model_with(&fig3, coeffs).and_then(|m| {
            let s0 = bulk_scale(&m);
            max_over([0.3, 1.0, 3.0].map(|c| {
                let x = c * s0;
                Ok((eve_aggregate_cdf_closed(&m, x)? - eve_aggregate_cdf_closed_infinite(&m, x)?).abs())
            }))
        }),
        1e-6,
    );
    s.record(
        M,
        "Xi * theta independent of K",
        (|| {
            let a = eve_model(&SystemConfig::fig3(64, 4))?.xi * legit_model(&SystemConfig::fig3(64, 4))?.gamma_scale;
            let b = eve_model(&SystemConfig::fig3(64, 64))?.xi * legit_model(&SystemConfig::fig3(64, 64))?.gamma_scale;
            Ok(rel(a, b))
        })(),
        1e-12,
    );
    s.holds(
        M,
        "aggregate CDFs nondecreasing and in [0, 1]",
        eve_model_with(&fig3, coeffs).and_then(|m| {
            let s0 = bulk_scale(&m);
            for form in [EveCdfForm::FiniteRe, EveCdfForm::InfiniteRe, EveCdfForm::ExactPgfl] {
                let mut last = 0.0;
                for i in 0..80 {
                    let f = form.cdf(&m, s0 * 10f64.powf(-3.0 + 8.0 * i as f64 / 79.0))?;
                    if !(f >= last && f <= 1.0) {
                        return Ok(false);
                    }
                    last = f;
                }
            }
            Ok(true)
        }),
    );

    // Sampled distributions.
    let legit_ks = (|| {
        let l = legit_model(&fig3)?;
        let mut plan = McPlan::new(opts.mc_trials, opts.seed);
        plan.collect = Collect {
            gamma_d: true,
            gamma_e: false,
        };
        let r = run_mc(&fig3, &plan)?;
        r.empirical_cdfs.gamma_d.unwrap().ks_distance(|x| cdf_gamma_d(&l, x))
    })();
    s.record(M, "user SNR Gamma fit, KS vs simulation", legit_ks, 0.02);
    for n in [16, 64] {
        let cfg = SystemConfig::fig3(n, 16);
        let ks = eve_model_with(&cfg, coeffs).and_then(|m| {
            let e = EmpiricalCdf::new(sample_single_eve_snr(
                &cfg,
                AngleMode::Locked,
                50.0,
                opts.mc_trials,
                opts.seed,
            )?)?;
            e.ks_distance(|x| eve_pointwise_cdf(&m, 50.0, x))
        });
        s.record(
            M,
            format!("single eavesdropper at 50 m, N={n}, KS vs simulation"),
            ks,
            0.03,
        );
    }
}

/// SNR at which the unbounded-plane aggregate CDF equals e^{-1}.
fn bulk_scale(m: &EveSnrModel) -> f64 {
    (m.t0 * ln_gamma(m.t1).exp()).powf(1.0 / m.t4)
}

fn sop_engine(s: &mut Suite) {
    const M: &str = "sop_engine";
    let with_alpha = |cfg: SystemConfig, p: u32| {
        let mut c = cfg;
        c.alpha2 = RationalExponent::integer(p).expect("positive");
        c
    };
    let closed = |cfg: &SystemConfig| -> Result<f64> {
        let (l, e) = models(cfg)?;
        Ok(sop_closed(&l, &e, cfg.c_th, cfg.alpha2)?.value)
    };

    let mut quiet = SystemConfig::fig3(16, 4).with_rho_d_db(79.0);
    quiet.eve_density = 0.0;
    s.record(
        M,
        "no eavesdroppers: SOP = F_D(phi - 1)",
        models(&quiet).and_then(|(l, e)| {
            Ok((sop_quadrature(&l, &e, quiet.c_th, EveCdfForm::FiniteRe)?.value
                - cdf_gamma_d(&l, quiet.c_th.exp_m1())?)
            .abs())
        }),
        1e-12,
    );
    let mut dark = SystemConfig::fig3(16, 4);
    dark.c_th = 0.0;
    dark.noise_d = dark.p_tx * 1e12;
    s.record(
        M,
        "vanishing user link: SOP = 1",
        models(&dark).and_then(|(l, e)| Ok(1.0 - sop_quadrature(&l, &e, 0.0, EveCdfForm::FiniteRe)?.value)),
        1e-9,
    );
    s.record(
        M,
        "closed (p=2) = free-space special case",
        max_over([0.0, 20.0, 40.0, 60.0].map(|db| {
            let cfg = SystemConfig::fig3(64, 16).with_rho_d_db(db);
            let (l, e) = models(&cfg)?;
            Ok((sop_closed(&l, &e, cfg.c_th, cfg.alpha2)?.value - sop_alpha2_freespace(&l, &e, cfg.c_th)?.value).abs())
        })),
        1e-10,
    );
    s.record(
        M,
        "closed (p=4) = urban special case, 20 points",
        max_over((0..20).map(|i| {
            let cfg = with_alpha(SystemConfig::fig3(64, 16), 4).with_rho_d_db(-10.0 + 6.0 * i as f64);
            let (l, e) = models(&cfg)?;
            Ok((sop_closed(&l, &e, cfg.c_th, cfg.alpha2)?.value - sop_alpha4_urban(&l, &e, cfg.c_th)?.value).abs())
        })),
        1e-8,
    );
    s.record(
        M,
        "closed form vs quadrature of the same high-SNR event",
        max_over([2, 4].into_iter().flat_map(|p| {
            [10.0, 30.0, 50.0].map(move |db| {
                let cfg = with_alpha(SystemConfig::fig3(64, 16), p).with_rho_d_db(db);
                let (l, e) = models(&cfg)?;
                let q = sop_quadrature_with(&l, &e, cfg.c_th, EveCdfForm::InfiniteRe, OutageKernel::RatioOnly)?.value;
                Ok((sop_closed(&l, &e, cfg.c_th, cfg.alpha2)?.value - q).abs())
            })
        })),
        1e-6,
    );
    s.known_deviation(
        M,
        "closed form vs exact-event quadrature, 0-60 dB",
        max_over([2, 4].into_iter().flat_map(|p| {
            (0..=12).map(move |i| {
                let cfg = with_alpha(SystemConfig::fig3(64, 16), p).with_rho_d_db(5.0 * i as f64);
                let (l, e) = models(&cfg)?;
                let q = sop_quadrature(&l, &e, cfg.c_th, EveCdfForm::InfiniteRe)?.value;
                Ok((sop_closed(&l, &e, cfg.c_th, cfg.alpha2)?.value - q).abs())
            })
        })),
        1e-3,
        "closed form replaces the event ln(1+x)-ln(1+y) < C by x/y < e^C; differs while user SNR is below e^C - 1",
    );
    s.record(
        M,
        "transmit-power invariance",
        max_over([2, 4].into_iter().flat_map(|p| {
            [10.0, 100.0].map(move |c| {
                let cfg = with_alpha(SystemConfig::fig3(64, 16), p).with_rho_d_db(30.0);
                let mut scaled = cfg.clone();
                scaled.noise_d /= c;
                scaled.noise_e /= c;
                Ok((closed(&cfg)? - closed(&scaled)?).abs())
            })
        })),
        1e-12,
    );
    s.record(
        M,
        "transmit-antenna invariance",
        max_over([30.0, 50.0].map(|db| {
            Ok((closed(&SystemConfig::fig3(64, 4).with_rho_d_db(db))?
                - closed(&SystemConfig::fig3(64, 64).with_rho_d_db(db))?)
            .abs())
        })),
        1e-12,
    );
    s.holds(
        M,
        "SOP nondecreasing in eavesdropper density",
        (|| {
            let mut last = 0.0;
            for i in 0..10 {
                let mut cfg = SystemConfig::fig3(64, 16).with_rho_d_db(40.0);
                cfg.eve_density = 1e-4 * 10f64.powf(i as f64 / 3.0);
                let v = closed(&cfg)?;
                if v < last {
                    return Ok(false);
                }
                last = v;
            }
            Ok(true)
        })(),
    );
    s.holds(
        M,
        "SOP nonincreasing in N",
        (|| {
            let mut last = 1.0;
            for n in [16, 36, 64, 100] {
                let v = closed(&SystemConfig::fig3(n, 16).with_rho_d_db(40.0))?;
                if v > last {
                    return Ok(false);
                }
                last = v;
            }
            Ok(true)
        })(),
    );
    s.record(
        M,
        "asymptote slope = 2/alpha2",
        max_over([2u32, 3, 4].map(|p| {
            let cfg = SystemConfig::fig7(RationalExponent::integer(p)?);
            let curve = (0..5)
                .map(|i| {
                    let c = cfg.clone().with_rho_d_db(60.0 + 10.0 * i as f64);
                    let (l, e) = models(&c)?;
                    Ok((c.rho_d(), sop_asymptotic_raw(&l, &e, c.c_th, p as f64)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((diversity_order_estimate(&curve)? - 2.0 / p as f64).abs())
        })),
        1e-12,
    );
    s.record(
        M,
        "two-term expansion vs asymptote at 100 dB",
        max_over([2u32, 3, 4].map(|p| {
            let cfg = SystemConfig::fig7(RationalExponent::integer(p)?).with_rho_d_db(100.0);
            let (l, e) = models(&cfg)?;
            Ok(rel(
                sop_two_term_expansion(&l, &e, cfg.c_th, cfg.alpha2)?,
                sop_asymptotic_raw(&l, &e, cfg.c_th, p as f64)?,
            ))
        })),
        0.01,
    );
}

fn montecarlo(s: &mut Suite, opts: &SelftestOptions) {
    const M: &str = "montecarlo";
    let trials = (opts.mc_trials / 10).max(1000);
    let mut clean = SystemConfig::fig3(16, 4).with_rho_d_db(10.0);
    clean.eve_density = 0.0;
    clean.c_th = 0.0;
    s.record(
        M,
        "no eavesdroppers, zero rate: SOP = 0",
        run_mc(&clean, &McPlan::new(trials, opts.seed)).map(|r| r.sop_hat),
        0.0,
    );
    s.record(
        M,
        "vanishing user link: SOP = 1",
        run_mc(
            &SystemConfig::fig3(16, 4).with_rho_d_db(-120.0),
            &McPlan::new(trials, opts.seed),
        )
        .map(|r| 1.0 - r.sop_hat),
        0.0,
    );
    let cfg = SystemConfig::fig3(16, 4).with_rho_d_db(79.0);
    s.holds(
        M,
        "identical reports for 1 and 4 workers",
        (|| {
            let mut plan = McPlan::new(trials, opts.seed);
            plan.collect = Collect {
                gamma_d: true,
                gamma_e: true,
            };
            plan.workers = Some(1);
            let a = run_mc(&cfg, &plan)?;
            plan.workers = Some(4);
            let b = run_mc(&cfg, &plan)?;
            Ok(a.sop_hat.to_bits() == b.sop_hat.to_bits() && a.empirical_cdfs == b.empirical_cdfs)
        })(),
    );
    s.record(
        M,
        "uniform draws, KS in units of the 5% critical value",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let n = 100_000;
            let e = EmpiricalCdf::new((0..n).map(|_| rng.random::<f64>()).collect())?;
            Ok(e.ks_distance(|x| Ok(x.clamp(0.0, 1.0)))? / (1.36 / (n as f64).sqrt()))
        })(),
        1.5,
    );
    s.record(
        M,
        "simulated SOP vs quadrature, |diff| / max(3 CI, 0.01)",
        (|| {
            let (l, e) = models(&cfg)?;
            let q = sop_quadrature(&l, &e, cfg.c_th, EveCdfForm::FiniteRe)?.value;
            let r = run_mc(&cfg, &McPlan::new(opts.mc_trials, opts.seed))?;
            Ok((r.sop_hat - q).abs() / (3.0 * r.ci95_halfwidth).max(0.01))
        })(),
        1.0,
    );
}

/// Runs every oracle check.
pub fn run_selftest(opts: &SelftestOptions) -> SelftestReport {
    let start = Instant::now();
    let mut s = Suite { checks: Vec::new() };
    special_functions(&mut s, &opts.coeffs);
    channel_model(&mut s, opts.seed);
    analytic_distributions(&mut s, &opts.coeffs, opts);
    sop_engine(&mut s);
    montecarlo(&mut s, opts);
    SelftestReport {
        checks: s.checks,
        runtime_s: start.elapsed().as_secs_f64(),
    }
}
