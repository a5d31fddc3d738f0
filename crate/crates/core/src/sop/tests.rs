use super::*;
use crate::analytic::{cdf_gamma_d, eve_model, legit_model, EveCdfForm};
use crate::channel::{RationalExponent, SystemConfig};

fn models(cfg: &SystemConfig) -> (crate::analytic::LegitSnrModel, crate::analytic::EveSnrModel) {
    (legit_model(cfg).unwrap(), eve_model(cfg).unwrap())
}

fn with_alpha(mut cfg: SystemConfig, p: u32) -> SystemConfig {
    cfg.alpha2 = RationalExponent::integer(p).unwrap();
    cfg
}

fn closed_at(cfg: &SystemConfig) -> f64 {
    let (l, e) = models(cfg);
    sop_closed(&l, &e, cfg.c_th, cfg.alpha2).unwrap().value
}

#[test]
fn no_eavesdroppers_reduces_to_noise_outage() {
    let mut cfg = SystemConfig::fig3(16, 4).with_rho_d_db(79.0);
    cfg.eve_density = 0.0;
    let (l, e) = models(&cfg);
    let r = sop_quadrature(&l, &e, cfg.c_th, EveCdfForm::FiniteRe).unwrap();
    let want = cdf_gamma_d(&l, cfg.c_th.exp_m1()).unwrap();
    assert!((r.value - want).abs() < 1e-12, "{} vs {want}", r.value);
    assert!(want > 1e-6 && want < 1.0 - 1e-6, "{want}");
}

#[test]
fn vanishing_user_link_is_always_in_outage() {
    let mut cfg = SystemConfig::fig3(16, 4);
    cfg.c_th = 0.0;
    cfg.noise_d = cfg.p_tx / 1e-12;
    let (l, e) = models(&cfg);
    for form in [EveCdfForm::FiniteRe, EveCdfForm::InfiniteRe] {
        let r = sop_quadrature(&l, &e, 0.0, form).unwrap();
        assert!(r.value > 1.0 - 1e-9, "{form:?}: {}", r.value);
    }
}

#[test]
fn integral_forms_agree_for_every_eavesdropper_law() {
    for (n, db) in [(16, 70.0), (64, 60.0)] {
        let cfg = SystemConfig::fig3(n, 4).with_rho_d_db(db);
        let (l, e) = models(&cfg);
        for form in [EveCdfForm::FiniteRe, EveCdfForm::InfiniteRe, EveCdfForm::ExactPgfl] {
            for kernel in [OutageKernel::Exact, OutageKernel::RatioOnly] {
                let q = sop_quadrature_forms(&l, &e, cfg.c_th, form, kernel).unwrap();
                assert!(
                    (q.eve_side - q.user_side).abs() < 1e-7,
                    "{form:?} {kernel:?}: {} vs {}",
                    q.eve_side,
                    q.user_side
                );
            }
        }
    }
}

#[test]
fn closed_form_equals_ratio_kernel_quadrature() {
    for p in [2, 3, 4] {
        for db in [10.0, 30.0, 50.0] {
            let cfg = with_alpha(SystemConfig::fig3(64, 16), p).with_rho_d_db(db);
            let (l, e) = models(&cfg);
            let c = sop_closed(&l, &e, cfg.c_th, cfg.alpha2).unwrap().value;
            let q = sop_quadrature_with(&l, &e, cfg.c_th, EveCdfForm::InfiniteRe, OutageKernel::RatioOnly)
                .unwrap()
                .value;
            assert!((c - q).abs() < 1e-7, "p={p} {db} dB: closed {c} quad {q}");
        }
    }
}

#[test]
fn free_space_special_case() {
    for db in [0.0, 15.0, 30.0, 45.0, 60.0] {
        let cfg = SystemConfig::fig3(64, 16).with_rho_d_db(db);
        let (l, e) = models(&cfg);
        let a = sop_closed(&l, &e, cfg.c_th, cfg.alpha2).unwrap();
        let b = sop_alpha2_freespace(&l, &e, cfg.c_th).unwrap();
        assert!((a.value - b.value).abs() < 1e-10, "{db}: {} vs {}", a.value, b.value);
        assert_eq!(b.method, SopMethod::ClosedAlpha2);
    }
    let cfg = with_alpha(SystemConfig::fig3(64, 16), 4);
    let (l, e) = models(&cfg);
    assert!(matches!(
        sop_alpha2_freespace(&l, &e, cfg.c_th),
        Err(crate::Error::NotApplicable(_))
    ));
}

#[test]
fn urban_special_case_over_argument_grid() {
    let base = with_alpha(SystemConfig::fig3(64, 16), 4);
    for i in 0..20 {
        let db = -10.0 + 6.0 * i as f64;
        let cfg = base.clone().with_rho_d_db(db);
        let (l, e) = models(&cfg);
        let a = sop_closed(&l, &e, cfg.c_th, cfg.alpha2).unwrap().value;
        let b = sop_alpha4_urban(&l, &e, cfg.c_th).unwrap().value;
        assert!(
            (a - b).abs() < 1e-8,
            "{db} dB (w={}): {a} vs {b}",
            alpha4_argument(&l, &e, cfg.c_th)
        );
    }
}

#[test]
fn urban_limits_and_monotonicity() {
    let base = with_alpha(SystemConfig::fig3(64, 16), 4);
    let mut last = f64::INFINITY;
    for i in 0..20 {
        let cfg = base.clone().with_rho_d_db(10.0 * i as f64);
        let (l, e) = models(&cfg);
        let v = sop_alpha4_urban(&l, &e, cfg.c_th).unwrap().value;
        assert!(v.is_finite() && v <= last, "not decreasing at step {i}");
        last = v;
    }
    let cfg = base.with_rho_d_db(700.0);
    let (l, e) = models(&cfg);
    let w = alpha4_argument(&l, &e, cfg.c_th);
    assert!(w < 1e-20, "{w}");
    let v = sop_alpha4_urban(&l, &e, cfg.c_th).unwrap().value;
    assert!((0.0..1e-12).contains(&v), "{v}");
}

#[test]
fn asymptote_is_an_exact_power_law() {
    for p in [2, 3, 4] {
        let cfg = with_alpha(SystemConfig::fig7(RationalExponent::integer(p).unwrap()), p);
        let curve: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let c = cfg.clone().with_rho_d_db(60.0 + 10.0 * i as f64);
                let (l, e) = models(&c);
                (c.rho_d(), sop_asymptotic_raw(&l, &e, c.c_th, p as f64).unwrap())
            })
            .collect();
        let slope = diversity_order_estimate(&curve).unwrap();
        assert!((slope - 2.0 / p as f64).abs() < 1e-12, "p={p}: {slope}");
    }
}

#[test]
fn asymptote_requires_enough_shape() {
    let mut cfg = SystemConfig::fig3(1, 1);
    cfg.rician_eps = 0.0;
    let (l, e) = models(&cfg);
    assert!(l.gamma_shape < 4.0);
    let err = sop_asymptotic(&l, &e, cfg.c_th, 1.0);
    assert!(err.is_err());
    let cfg = with_alpha(cfg, 1);
    let (l, e) = models(&cfg);
    assert!(matches!(
        sop_asymptotic(&l, &e, cfg.c_th, 1.0),
        Err(crate::Error::NotApplicable(_))
    ));
}

#[test]
fn closed_approaches_asymptote() {
    let cfg = SystemConfig::fig3(64, 16).with_rho_d_db(80.0);
    let (l, e) = models(&cfg);
    let ratio =
        sop_closed(&l, &e, cfg.c_th, cfg.alpha2).unwrap().value / sop_asymptotic_raw(&l, &e, cfg.c_th, 2.0).unwrap();
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    let cfg = with_alpha(SystemConfig::fig3(64, 16), 4).with_rho_d_db(100.0);
    let (l, e) = models(&cfg);
    let ratio = sop_alpha4_urban(&l, &e, cfg.c_th).unwrap().value / sop_asymptotic_raw(&l, &e, cfg.c_th, 4.0).unwrap();
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn two_term_expansion_reproduces_asymptote() {
    for p in [2, 3, 4] {
        let cfg = SystemConfig::fig7(RationalExponent::integer(p).unwrap()).with_rho_d_db(100.0);
        let (l, e) = models(&cfg);
        let two = sop_two_term_expansion(&l, &e, cfg.c_th, cfg.alpha2).unwrap();
        let asym = sop_asymptotic_raw(&l, &e, cfg.c_th, p as f64).unwrap();
        assert!((two / asym - 1.0).abs() < 0.01, "p={p}: {two} vs {asym}");
    }
    let cfg = SystemConfig::fig3(16, 4);
    let mut cfg = with_alpha(cfg, 5);
    cfg.alpha2 = RationalExponent::new(5, 2).unwrap();
    let cfg = cfg.with_rho_d_db(100.0);
    let (l, e) = models(&cfg);
    let two = sop_two_term_expansion(&l, &e, cfg.c_th, cfg.alpha2).unwrap();
    let asym = sop_asymptotic_raw(&l, &e, cfg.c_th, 2.5).unwrap();
    assert!((two / asym - 1.0).abs() < 0.01, "{two} vs {asym}");
}

#[test]
fn transmit_power_cancels() {
    for p in [2, 4] {
        let cfg = with_alpha(SystemConfig::fig3(64, 16), p).with_rho_d_db(30.0);
        let a = closed_at(&cfg);
        for c in [10.0, 100.0] {
            let mut scaled = cfg.clone();
            scaled.noise_d /= c;
            scaled.noise_e /= c;
            let b = closed_at(&scaled);
            assert!((a - b).abs() < 1e-12, "p={p} c={c}: {a} vs {b}");
        }
    }
}

#[test]
fn transmit_antennas_cancel() {
    for db in [10.0, 30.0, 50.0] {
        let a = closed_at(&SystemConfig::fig3(64, 4).with_rho_d_db(db));
        let b = closed_at(&SystemConfig::fig3(64, 64).with_rho_d_db(db));
        assert!((a - b).abs() < 1e-12, "{db}: {a} vs {b}");
    }
}

#[test]
fn monotone_in_density_elements_and_user_distance() {
    let base = SystemConfig::fig3(64, 16).with_rho_d_db(30.0);
    let mut last = 0.0;
    for i in 0..10 {
        let mut cfg = base.clone();
        cfg.eve_density = 1e-4 * (1.0 + i as f64);
        let v = closed_at(&cfg);
        assert!(v >= last);
        last = v;
    }
    let mut last = 1.0;
    for n in [16, 36, 64, 100] {
        let v = closed_at(&SystemConfig::fig3(n, 16).with_rho_d_db(30.0));
        assert!(v <= last, "N={n}");
        last = v;
    }
    let mut last = 0.0;
    for d in [20.0, 30.0, 40.0, 60.0, 80.0] {
        let mut cfg = base.clone();
        cfg.d_rd = d;
        let v = closed_at(&cfg);
        assert!(v >= last, "d_rd={d}");
        last = v;
    }
}

#[test]
fn urban_argument_ignores_source_distance() {
    let arg = |d_sr: f64| {
        let mut cfg = with_alpha(SystemConfig::fig3(64, 16), 4).with_rho_d_db(40.0);
        cfg.d_sr = d_sr;
        let (l, e) = models(&cfg);
        alpha4_argument(&l, &e, cfg.c_th)
    };
    assert!((arg(30.0) / arg(60.0) - 1.0).abs() < 1e-10);
}

#[test]
fn oversized_order_falls_back_to_quadrature() {
    let mut cfg = SystemConfig::fig3(16, 4).with_rho_d_db(40.0);
    cfg.alpha2 = RationalExponent::new(7, 9).unwrap();
    let (l, e) = models(&cfg);
    let r = sop_closed(&l, &e, cfg.c_th, cfg.alpha2).unwrap();
    assert_eq!(r.method, SopMethod::Quadrature);
    assert!(r.warnings.iter().any(|w| w.contains("exceeds the cap")));
}

#[test]
fn mismatched_exponent_rejected() {
    let cfg = SystemConfig::fig3(16, 4);
    let (l, e) = models(&cfg);
    assert!(sop_closed(&l, &e, cfg.c_th, RationalExponent::integer(3).unwrap()).is_err());
    assert!(sop_closed(&l, &e, -0.1, cfg.alpha2).is_err());
}

#[test]
fn results_carry_hash_and_bounded_values() {
    let cfg = SystemConfig::fig3(16, 4).with_rho_d_db(40.0);
    let (l, e) = models(&cfg);
    let a = sop_quadrature(&l, &e, cfg.c_th, EveCdfForm::FiniteRe).unwrap();
    let b = sop_quadrature(&l, &e, cfg.c_th, EveCdfForm::InfiniteRe).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    for r in [a, b] {
        assert!((0.0..=1.0).contains(&r.value));
        assert!(r.abs_uncertainty >= 0.0 && r.abs_uncertainty < 1e-6);
    }
}
