use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ris_secrecy::analytic::{eve_aggregate_cdf_exact, eve_model, legit_model};
use ris_secrecy::montecarlo::run_mc;
use ris_secrecy::sop::{sop_closed, sop_quadrature};
use ris_secrecy::special::{marcum_q1, meijer_contour, meijer_series};
use ris_secrecy::{EveCdfForm, McPlan, MeijerGRestricted, RationalExponent, SystemConfig};

fn special(c: &mut Criterion) {
    let mut g = c.benchmark_group("special");
    for (a, b) in [(0.5, 1.0), (5.0, 6.0), (20.0, 25.0)] {
        g.bench_with_input(
            BenchmarkId::new("marcum_q1", format!("{a}-{b}")),
            &(a, b),
            |bch, &(a, b)| bch.iter(|| marcum_q1(black_box(a), black_box(b)).unwrap()),
        );
    }
    let m = MeijerGRestricted::new(vec![0.0, 0.3, 1.7], 1.5).unwrap();
    g.bench_function("meijer_series_3", |b| {
        b.iter(|| meijer_series(black_box(&m), 1e-12).unwrap())
    });
    g.bench_function("meijer_contour_3", |b| {
        b.iter(|| meijer_contour(black_box(&m), 1e-10).unwrap())
    });
    g.finish();
}

fn sop(c: &mut Criterion) {
    let mut g = c.benchmark_group("sop");
    for p in [2u32, 3, 4] {
        let mut cfg = SystemConfig::fig3(64, 16).with_rho_d_db(40.0);
        cfg.alpha2 = RationalExponent::integer(p).unwrap();
        let (l, e) = (legit_model(&cfg).unwrap(), eve_model(&cfg).unwrap());
        g.bench_with_input(BenchmarkId::new("closed", p), &p, |b, _| {
            b.iter(|| sop_closed(black_box(&l), black_box(&e), cfg.c_th, cfg.alpha2).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("quadrature_finite", p), &p, |b, _| {
            b.iter(|| sop_quadrature(black_box(&l), black_box(&e), cfg.c_th, EveCdfForm::FiniteRe).unwrap())
        });
    }
    let cfg = SystemConfig::fig3(64, 16);
    let e = eve_model(&cfg).unwrap();
    g.bench_function("eve_cdf_exact_pgfl", |b| {
        b.iter(|| eve_aggregate_cdf_exact(black_box(&e), 1e-3).unwrap())
    });
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("montecarlo");
    g.sample_size(10);
    for n in [16usize, 64] {
        let cfg = SystemConfig::fig3(n, 16).with_rho_d_db(60.0);
        let plan = McPlan::new(20_000, 1);
        g.bench_with_input(BenchmarkId::new("run_mc_20k", n), &n, |b, _| {
            b.iter(|| run_mc(black_box(&cfg), &plan).unwrap())
        });
        let mut full = plan.clone();
        full.full_channel = true;
        full.trials = 2_000;
        g.bench_with_input(BenchmarkId::new("run_mc_full_channel_2k", n), &n, |b, _| {
            b.iter(|| run_mc(black_box(&cfg), &full).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, special, sop, monte_carlo);
criterion_main!(benches);
