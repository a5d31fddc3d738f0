use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use ris_secrecy::analytic::{eve_model, legit_model};
use ris_secrecy::montecarlo::run_mc;
use ris_secrecy::selftest::{run_selftest, SelftestOptions, Status};
use ris_secrecy::sop::{config_hash, diversity_order_estimate, sop_asymptotic, sop_closed, sop_quadrature};
use ris_secrecy::{ConfigFile, EveCdfForm, McPlan, McReport, RationalExponent, SopResult, SystemConfig};

use crate::output::{emit, Cell, Format, Table};
use crate::{Figure, McArgs, RunArgs, EXIT_NUMERICAL, EXIT_SELFTEST};

#[derive(Debug, Clone, Serialize)]
struct Sweep {
    field: String,
    values: Vec<f64>,
}

fn parse_sweep(s: &str, cth_bits: bool) -> Result<Sweep> {
    let (field, range) = s
        .split_once('=')
        .with_context(|| format!("--sweep {s:?}: expected <field>=<start>:<stop>:<step>"))?;
    let field = field.trim();
    if !SystemConfig::SWEEPABLE.contains(&field) {
        bail!(
            "--sweep field `{field}` is not sweepable; expected one of {}",
            SystemConfig::SWEEPABLE.join(", ")
        );
    }
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("--sweep {s:?}: bounds must be numbers"))?;
    let [start, stop, step] = parts[..] else {
        bail!("--sweep {s:?}: expected three numbers start:stop:step");
    };
    if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite() && stop >= start) {
        bail!("--sweep {s:?}: need finite start <= stop and step > 0");
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        bail!("--sweep {s:?}: {count} points exceeds the 100000-point limit");
    }
    let scale = if cth_bits && field == "c_th" {
        std::f64::consts::LN_2
    } else {
        1.0
    };
    let values = (0..count).map(|i| (start + i as f64 * step) * scale).collect();
    Ok(Sweep {
        field: field.to_string(),
        values,
    })
}

fn load_config(run: &RunArgs) -> Result<SystemConfig> {
    let text = fs::read_to_string(&run.config).with_context(|| format!("reading {}", run.config.display()))?;
    let mut cfg = SystemConfig::from_json_str(&text).with_context(|| format!("in {}", run.config.display()))?;
    if run.cth_bits {
        cfg.c_th *= std::f64::consts::LN_2;
        cfg.validate()?;
    }
    Ok(cfg)
}

/// The configuration at every grid point, validated.
fn grid(base: &SystemConfig, sweep: Option<&Sweep>) -> Result<Vec<(f64, SystemConfig)>> {
    let Some(sweep) = sweep else {
        return Ok(vec![(f64::NAN, base.clone())]);
    };
    sweep
        .values
        .iter()
        .map(|&v| {
            let mut cfg = base.clone();
            cfg.set_field(&sweep.field, v)?;
            cfg.validate().with_context(|| format!("at {} = {v}", sweep.field))?;
            Ok((v, cfg))
        })
        .collect()
}

#[derive(Serialize)]
struct Provenance<'a, R: Serialize> {
    command: &'a str,
    version: &'static str,
    config: ConfigFile,
    config_hash: String,
    beta0: f64,
    beta0_note: &'static str,
    c_th_nats: f64,
    sweep: Option<&'a Sweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<&'a McPlan>,
    details: R,
}

const BETA0_NOTE: &str = "reference path gain at 1 m; fixed default since the figure scenarios leave it unspecified";

fn provenance<'a, R: Serialize>(
    command: &'a str,
    cfg: &SystemConfig,
    sweep: Option<&'a Sweep>,
    details: R,
) -> Provenance<'a, R> {
    Provenance {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.to_file(),
        config_hash: config_hash(cfg),
        beta0: cfg.beta0,
        beta0_note: BETA0_NOTE,
        c_th_nats: cfg.c_th,
        sweep,
        seed: None,
        plan: None,
        details,
    }
}

#[derive(Debug, Clone, Serialize)]
struct AnalyticRow {
    sweep_value: f64,
    config_hash: String,
    quadrature: std::result::Result<SopResult, String>,
    closed: std::result::Result<SopResult, String>,
    asymptotic: std::result::Result<SopResult, String>,
}

impl AnalyticRow {
    fn all_failed(&self) -> bool {
        self.quadrature.is_err() && self.closed.is_err() && self.asymptotic.is_err()
    }
}

fn analytic_row(value: f64, cfg: &SystemConfig) -> Result<AnalyticRow> {
    let (l, e) = (legit_model(cfg), eve_model(cfg));
    let (l, e) = match (l, e) {
        (Ok(l), Ok(e)) => (l, e),
        (Err(err), _) | (_, Err(err)) if err.is_validation() => return Err(err.into()),
        (Err(err), _) | (_, Err(err)) => {
            let msg = err.to_string();
            return Ok(AnalyticRow {
                sweep_value: value,
                config_hash: config_hash(cfg),
                quadrature: Err(msg.clone()),
                closed: Err(msg.clone()),
                asymptotic: Err(msg),
            });
        }
    };
    let s = |r: ris_secrecy::Result<SopResult>| r.map_err(|e| e.to_string());
    Ok(AnalyticRow {
        sweep_value: value,
        config_hash: config_hash(cfg),
        quadrature: s(sop_quadrature(&l, &e, cfg.c_th, EveCdfForm::FiniteRe)),
        closed: s(sop_closed(&l, &e, cfg.c_th, cfg.alpha2)),
        asymptotic: s(sop_asymptotic(&l, &e, cfg.c_th, cfg.alpha2.value())),
    })
}

fn analytic_rows(points: &[(f64, SystemConfig)]) -> Result<Vec<AnalyticRow>> {
    points.par_iter().map(|(v, cfg)| analytic_row(*v, cfg)).collect()
}

fn value_cells(r: &std::result::Result<SopResult, String>) -> (Cell, Cell) {
    match r {
        Ok(s) => (Cell::num(s.value), Cell::num(s.abs_uncertainty)),
        Err(_) => (Cell::Float(None), Cell::Float(None)),
    }
}

fn notes(row: &AnalyticRow) -> String {
    let mut out = Vec::new();
    for (name, r) in [
        ("quadrature", &row.quadrature),
        ("closed", &row.closed),
        ("asymptotic", &row.asymptotic),
    ] {
        match r {
            Err(e) => out.push(format!("{name}: {e}")),
            Ok(s) => out.extend(s.warnings.iter().map(|w| format!("{name}: {w}"))),
        }
    }
    out.join("; ")
}

const ANALYZE_HEADER: [&str; 9] = [
    "sweep_value",
    "sop_quadrature",
    "sop_closed",
    "sop_asymptotic",
    "err_quadrature",
    "err_closed",
    "err_asymptotic",
    "closed_method",
    "notes",
];

fn analytic_cells(row: &AnalyticRow) -> Vec<Cell> {
    let (q, qe) = value_cells(&row.quadrature);
    let (c, ce) = value_cells(&row.closed);
    let (a, ae) = value_cells(&row.asymptotic);
    let method = row
        .closed
        .as_ref()
        .map(|s| s.method.as_str().to_string())
        .unwrap_or_default();
    vec![
        Cell::num(row.sweep_value),
        q,
        c,
        a,
        qe,
        ce,
        ae,
        Cell::Text(method),
        Cell::Text(notes(row)),
    ]
}

fn numerical_check(rows: &[AnalyticRow]) -> u8 {
    match rows.iter().find(|r| r.all_failed()) {
        Some(r) => {
            eprintln!(
                "error: no analytic method succeeded at sweep value {}: {}",
                r.sweep_value,
                notes(r)
            );
            EXIT_NUMERICAL
        }
        None => 0,
    }
}

pub fn analyze(run: &RunArgs) -> Result<u8> {
    let cfg = load_config(run)?;
    let sweep = run.sweep.as_deref().map(|s| parse_sweep(s, run.cth_bits)).transpose()?;
    let points = grid(&cfg, sweep.as_ref())?;
    let rows = analytic_rows(&points)?;
    let mut table = Table::new(ANALYZE_HEADER.to_vec());
    for row in &rows {
        table.push(analytic_cells(row));
    }
    #[derive(Serialize)]
    struct Details<'a> {
        quadrature_cdf: &'static str,
        rows: &'a [AnalyticRow],
    }
    let meta = provenance(
        "analyze",
        &cfg,
        sweep.as_ref(),
        Details {
            quadrature_cdf: "finite_re",
            rows: &rows,
        },
    );
    emit(&table, run.format, run.out.as_deref(), &meta)?;
    Ok(numerical_check(&rows))
}

fn plan(mc: &McArgs) -> Result<McPlan> {
    let mut plan = McPlan::new(mc.trials, mc.seed);
    plan.angle_mode = mc.angle_mode.into();
    plan.validate()?;
    Ok(plan)
}

#[derive(Debug, Clone, Serialize)]
struct McRow {
    sweep_value: f64,
    config_hash: String,
    sop_hat: f64,
    ci95_halfwidth: f64,
    zero_event_bound: Option<f64>,
    outages: u64,
    trials: u64,
    seed: u64,
    runtime_s: f64,
}

impl McRow {
    fn new(value: f64, cfg: &SystemConfig, r: &McReport) -> Self {
        McRow {
            sweep_value: value,
            config_hash: config_hash(cfg),
            sop_hat: r.sop_hat,
            ci95_halfwidth: r.ci95_halfwidth,
            zero_event_bound: r.zero_event_bound,
            outages: r.outages,
            trials: r.trials,
            seed: r.master_seed,
            runtime_s: r.runtime_s,
        }
    }

    fn interval(&self) -> (f64, f64) {
        let h = self.zero_event_bound.unwrap_or(self.ci95_halfwidth);
        ((self.sop_hat - h).max(0.0), (self.sop_hat + h).min(1.0))
    }
}

fn mc_rows(points: &[(f64, SystemConfig)], plan: &McPlan) -> Result<Vec<McRow>> {
    points
        .iter()
        .map(|(v, cfg)| {
            let r = run_mc(cfg, plan).with_context(|| format!("Monte-Carlo at sweep value {v}"))?;
            Ok(McRow::new(*v, cfg, &r))
        })
        .collect()
}

const SIMULATE_HEADER: [&str; 7] = [
    "sweep_value",
    "sop_mc",
    "ci95_lo",
    "ci95_hi",
    "outages",
    "trials",
    "seed",
];

fn mc_cells(row: &McRow) -> Vec<Cell> {
    let (lo, hi) = row.interval();
    vec![
        Cell::num(row.sweep_value),
        Cell::num(row.sop_hat),
        Cell::num(lo),
        Cell::num(hi),
        Cell::Int(row.outages),
        Cell::Int(row.trials),
        Cell::Int(row.seed),
    ]
}

pub fn simulate(run: &RunArgs, mc: &McArgs) -> Result<u8> {
    let cfg = load_config(run)?;
    let plan = plan(mc)?;
    let sweep = run.sweep.as_deref().map(|s| parse_sweep(s, run.cth_bits)).transpose()?;
    let points = grid(&cfg, sweep.as_ref())?;
    let rows = mc_rows(&points, &plan)?;
    let mut table = Table::new(SIMULATE_HEADER.to_vec());
    for row in &rows {
        table.push(mc_cells(row));
    }
    let mut meta = provenance("simulate", &cfg, sweep.as_ref(), &rows);
    meta.seed = Some(plan.master_seed);
    meta.plan = Some(&plan);
    // wall-clock times are the only nondeterministic content; keep them in the sidecar
    emit(&table, run.format, run.out.as_deref(), &meta)?;
    Ok(0)
}

const REPRODUCE_HEADER: [&str; 9] = [
    "rho_d_db",
    "sop_mc",
    "ci95_lo",
    "ci95_hi",
    "sop_quadrature",
    "sop_closed",
    "sop_asymptotic",
    "err_closed",
    "notes",
];

struct Curve {
    name: String,
    cfg: SystemConfig,
}

fn curves(figure: Figure) -> Result<(Vec<Curve>, Sweep)> {
    let (curves, stop) = match figure {
        Figure::Fig3 => (
            [(16, 4), (16, 16), (64, 4), (64, 16)]
                .iter()
                .map(|&(n, k)| Curve {
                    name: format!("fig3_N{n}_K{k}"),
                    cfg: SystemConfig::fig3(n, k),
                })
                .collect(),
            60.0,
        ),
        Figure::Fig7 => (
            [2u32, 3, 4]
                .iter()
                .map(|&p| {
                    Ok(Curve {
                        name: format!("fig7_alpha2_{p}"),
                        cfg: SystemConfig::fig7(RationalExponent::integer(p)?),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            100.0,
        ),
    };
    let values = (0..=(stop / 5.0) as usize).map(|i| 5.0 * i as f64).collect();
    Ok((
        curves,
        Sweep {
            field: "rho_d_db".into(),
            values,
        },
    ))
}

#[derive(Debug, Serialize)]
struct SlopeRow {
    curve: String,
    alpha2: f64,
    target: f64,
    slope_closed: Option<f64>,
    slope_mc: Option<f64>,
    max_mc_closed_gap: f64,
    max_gap_in_ci: f64,
}

/// Least-squares diversity slope over the top decade, when every point there is usable.
fn slope(points: &[(f64, f64)]) -> Option<f64> {
    let top = points.last()?.0;
    let tail: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(r, _)| r >= top / 10.0 * (1.0 - 1e-12))
        .collect();
    if tail.iter().any(|&(_, s)| !(s > 0.0)) {
        return None;
    }
    diversity_order_estimate(&tail).ok()
}

pub fn reproduce(figure: Figure, out: &Path, format: Format, mc: &McArgs) -> Result<u8> {
    let plan = plan(mc)?;
    let (curves, sweep) = curves(figure)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut summary = Vec::new();
    let mut code = 0;
    for curve in &curves {
        let points = grid(&curve.cfg, Some(&sweep))?;
        let analytic = analytic_rows(&points)?;
        code = code.max(numerical_check(&analytic));
        let sims = mc_rows(&points, &plan)?;
        let mut table = Table::new(REPRODUCE_HEADER.to_vec());
        let (mut gap, mut gap_ci) = (0.0f64, 0.0f64);
        for (a, m) in analytic.iter().zip(&sims) {
            let (lo, hi) = m.interval();
            let (q, _) = value_cells(&a.quadrature);
            let (c, ce) = value_cells(&a.closed);
            let (asy, _) = value_cells(&a.asymptotic);
            if let Ok(c) = &a.closed {
                let d = (m.sop_hat - c.value).abs();
                gap = gap.max(d);
                let h = m.zero_event_bound.unwrap_or(m.ci95_halfwidth);
                if h > 0.0 {
                    gap_ci = gap_ci.max(d / h);
                }
            }
            table.push(vec![
                Cell::num(a.sweep_value),
                Cell::num(m.sop_hat),
                Cell::num(lo),
                Cell::num(hi),
                q,
                c,
                asy,
                ce,
                Cell::Text(notes(a)),
            ]);
        }
        let rho = |v: f64| 10f64.powf(v / 10.0);
        let closed_curve: Vec<(f64, f64)> = analytic
            .iter()
            .map(|a| (rho(a.sweep_value), a.closed.as_ref().map_or(f64::NAN, |s| s.value)))
            .collect();
        let mc_curve: Vec<(f64, f64)> = sims
            .iter()
            .map(|m| (rho(m.sweep_value), if m.outages >= 10 { m.sop_hat } else { f64::NAN }))
            .collect();
        let alpha2 = curve.cfg.alpha2.value();
        summary.push(SlopeRow {
            curve: curve.name.clone(),
            alpha2,
            target: 2.0 / alpha2,
            slope_closed: slope(&closed_curve),
            slope_mc: slope(&mc_curve),
            max_mc_closed_gap: gap,
            max_gap_in_ci: gap_ci,
        });

        #[derive(Serialize)]
        struct Details<'a> {
            quadrature_cdf: &'static str,
            analytic: &'a [AnalyticRow],
            monte_carlo: &'a [McRow],
        }
        let mut meta = provenance(
            "reproduce",
            &curve.cfg,
            Some(&sweep),
            Details {
                quadrature_cdf: "finite_re",
                analytic: &analytic,
                monte_carlo: &sims,
            },
        );
        meta.seed = Some(plan.master_seed);
        meta.plan = Some(&plan);
        emit(&table, format, Some(&out.join(format!("{}.{ext}", curve.name))), &meta)?;
        eprintln!("wrote {}", out.join(format!("{}.{ext}", curve.name)).display());
    }

    let mut table = Table::new(vec![
        "curve",
        "alpha2",
        "target_slope",
        "slope_closed",
        "slope_mc",
        "max_mc_closed_gap",
        "max_gap_in_ci",
    ]);
    for s in &summary {
        table.push(vec![
            Cell::Text(s.curve.clone()),
            Cell::num(s.alpha2),
            Cell::num(s.target),
            Cell::Float(s.slope_closed),
            Cell::Float(s.slope_mc),
            Cell::num(s.max_mc_closed_gap),
            Cell::num(s.max_gap_in_ci),
        ]);
    }
    let name = match figure {
        Figure::Fig3 => "fig3",
        Figure::Fig7 => "fig7",
    };
    #[derive(Serialize)]
    struct SummaryMeta<'a> {
        command: &'static str,
        version: &'static str,
        seed: u64,
        plan: &'a McPlan,
        slope_fit: &'static str,
        curves: BTreeMap<String, ConfigFile>,
        slopes: &'a [SlopeRow],
    }
    let meta = SummaryMeta {
        command: "reproduce",
        version: env!("CARGO_PKG_VERSION"),
        seed: plan.master_seed,
        plan: &plan,
        slope_fit: "least squares of -ln(sop) on ln(rho_d) over the top decade of the rho_d grid; MC slope needs at least 10 outages per point",
        curves: curves.iter().map(|c| (c.name.clone(), c.cfg.to_file())).collect(),
        slopes: &summary,
    };
    let path = out.join(format!("{name}_slopes.{ext}"));
    emit(&table, format, Some(&path), &meta)?;
    eprintln!("wrote {}", path.display());
    Ok(code)
}

pub fn selftest(trials: u64, seed: u64, out: Option<&Path>) -> Result<u8> {
    let opts = SelftestOptions {
        mc_trials: trials,
        seed,
        ..SelftestOptions::default()
    };
    let report = run_selftest(&opts);
    println!(
        "{:<6} {:<24} {:<64} {:>12} {:>10}",
        "status", "module", "check", "measured", "tolerance"
    );
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::KnownDeviation => "KNOWN",
        };
        println!(
            "{status:<6} {:<24} {:<64} {:>12.3e} {:>10.1e}",
            c.module, c.name, c.measured, c.tolerance
        );
        if c.status != Status::Pass && !c.note.is_empty() {
            println!("       {}", c.note);
        }
    }
    println!(
        "{} checks, {} failed, {} known deviations, {:.1} s",
        report.checks.len(),
        report.failures(),
        report
            .checks
            .iter()
            .filter(|c| c.status == Status::KnownDeviation)
            .count(),
        report.runtime_s
    );
    if let Some(path) = out {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if report.passed() { 0 } else { EXIT_SELFTEST })
}
