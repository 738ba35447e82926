//! File outputs. Everything written here is a pure function of the traces,
//! so identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ExperimentOutcome, SweepReport};
use crate::error::Result;
use crate::problems::ProblemInstance;
use crate::solvers::{GapKind, RunTrace};

pub const TRACE_HEADER: &str = "iter,primal_gap,duality_gap,szo_calls,wall_ms";
pub const AGGREGATE_HEADER: &str = "iter,primal_gap,duality_gap,szo_calls,wall_ms,primal_gap_stderr,duality_gap_stderr";

/// Shortest round-trip scientific notation, independent of locale.
pub fn format_float(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// One trial as CSV; the primal-gap field is empty when `f*` is unknown.
pub fn trace_csv(trace: &RunTrace) -> String {
    let mut s = String::with_capacity(64 * (trace.records.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.t,
            opt(r.primal_gap),
            format_float(r.duality_gap),
            r.oracle_calls,
            format_float(r.wall_ms)
        );
    }
    s
}

pub(super) fn write_trial(dir: &Path, trial: usize, trace: &RunTrace) -> Result<()> {
    fs::write(dir.join(format!("trial_{trial:03}.csv")), trace_csv(trace))?;
    Ok(())
}

fn aggregate_csv(outcome: &ExperimentOutcome) -> String {
    let a = &outcome.aggregate;
    let mut s = String::with_capacity(96 * (a.len() + 1));
    s.push_str(AGGREGATE_HEADER);
    s.push('\n');
    for i in 0..a.len() {
        let (pg, pse) = match &a.primal_gap {
            Some((m, e)) => (Some(m[i]), Some(e[i])),
            None => (None, None),
        };
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{}",
            opt(pg),
            format_float(a.duality_gap.0[i]),
            format_float(a.szo_calls[i]),
            format_float(a.wall_ms[i]),
            opt(pse),
            format_float(a.duality_gap.1[i]),
        );
    }
    s
}

fn rate_report(outcome: &ExperimentOutcome, instance: &ProblemInstance) -> String {
    let c = &outcome.config;
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", c.name);
    let _ = writeln!(s, "problem: {} (d = {}), set: {}", instance.name(), instance.dim(), instance.set().kind());
    let solver = match c.solver.algorithm {
        super::Algorithm::ZerothOrder => format!("zeroth_order/{}", c.estimator().map(|e| e.name()).unwrap_or_default()),
        other => format!("{other:?}"),
    };
    let _ = writeln!(s, "solver: {solver}, T = {}, trials = {}, seed = {}", c.horizon, c.trials, c.seed);
    if let Some(n) = instance.num_samples() {
        let _ = writeln!(s, "samples: {n}");
    }
    let _ = writeln!(s, "f_star: {}", instance.f_star().map_or("unknown".into(), format_float));
    let _ = writeln!(s, "lipschitz: {}", instance.lipschitz().map_or("unknown".into(), format_float));
    let _ = writeln!(s, "diameter: {}", format_float(instance.set().diameter()));
    if let Some(m) = &outcome.moments {
        let _ = writeln!(
            s,
            "gradient moments at x0 ({} draws): E|grad F|^2 = {}, E|grad F - grad f|^2 = {}",
            m.draws,
            format_float(m.grad_sq),
            format_float(m.variance)
        );
    }
    let gap_kind = match outcome.traces.first().map(|t| t.gap_kind) {
        Some(GapKind::Surrogate) => "surrogate <d_t, x_t - v_t> (proxy)",
        _ => "exact",
    };
    let _ = writeln!(s, "duality gap: {gap_kind}");
    let a = &outcome.aggregate;
    if let Some((pg, se)) = &a.primal_gap {
        let _ = writeln!(s, "final primal gap: {} +- {}", format_float(pg[pg.len() - 1]), format_float(se[se.len() - 1]));
    }
    let (dg, dse) = &a.duality_gap;
    let _ = writeln!(s, "final duality gap: {} +- {}", format_float(dg[dg.len() - 1]), format_float(dse[dse.len() - 1]));
    let _ = writeln!(s, "total oracle calls per trial: {}", format_float(a.szo_calls[a.szo_calls.len() - 1]));
    let _ = writeln!(s, "\nlog-log fits (trial means):");
    for f in &outcome.fits {
        match &f.fit {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    "  {:<16} slope {:+.4}  intercept {:+.4}  r2 {:.4}  window [{}, {}]",
                    f.metric, r.slope, r.intercept, r.r_squared, r.window.0, r.window.1
                );
            }
            Err(e) => {
                let _ = writeln!(s, "  {:<16} no fit: {e}", f.metric);
            }
        }
    }
    if !outcome.assertions.is_empty() {
        let _ = writeln!(s, "\nassertions:");
        for a in &outcome.assertions {
            let slope = a.slope.map_or("none".into(), |v| format!("{v:+.4}"));
            let verdict = if a.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "  {verdict} {} slope {slope} in [{}, {}]", a.metric, a.range[0], a.range[1]);
        }
    }
    s
}

fn plot_script(has_primal: bool) -> String {
    let mut s = String::from(
        "# gnuplot script; run from this directory: gnuplot plot.gp\n\
         set datafile separator ','\n\
         set terminal pngcairo size 900,600\n\
         set logscale xy\n\
         set xlabel 'iteration + 1'\n\
         set grid\n",
    );
    if has_primal {
        s.push_str(
            "set output 'primal_gap.png'\n\
             set ylabel 'primal gap'\n\
             plot 'aggregate.csv' skip 1 using ($1+1):2 with lines title 'mean', \\\n\
             \x20    '' skip 1 using ($1+1):($2+$6) with lines dt 2 title '+ stderr'\n",
        );
    }
    s.push_str(
        "set output 'duality_gap.png'\n\
         set ylabel 'duality gap'\n\
         plot 'aggregate.csv' skip 1 using ($1+1):3 with lines title 'mean', \\\n\
         \x20    '' skip 1 using ($1+1):($3+$7) with lines dt 2 title '+ stderr'\n",
    );
    s
}

pub(super) fn write_all(dir: &Path, outcome: &ExperimentOutcome, instance: &ProblemInstance) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, t) in outcome.traces.iter().enumerate() {
        write_trial(dir, k, t)?;
    }
    fs::write(dir.join("aggregate.csv"), aggregate_csv(outcome))?;
    fs::write(dir.join("rate_report.txt"), rate_report(outcome, instance))?;
    fs::write(dir.join("plot.gp"), plot_script(outcome.aggregate.primal_gap.is_some()))?;
    fs::write(dir.join("config.toml"), outcome.config.to_toml())?;
    Ok(())
}

pub(super) fn write_sweep(dir: &Path, report: &SweepReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = format!("dim,{0},{0}_stderr\n", report.metric);
    for (d, m, se) in &report.points {
        let _ = writeln!(csv, "{d},{},{}", format_float(*m), format_float(*se));
    }
    fs::write(dir.join("sweep.csv"), csv)?;
    let mut s = format!("final {} against dimension\n", report.metric);
    for (d, m, se) in &report.points {
        let _ = writeln!(s, "  d = {d:>5}: {} +- {}", format_float(*m), format_float(*se));
    }
    match (&report.fit, &report.note) {
        (Some(f), _) => {
            let _ = writeln!(s, "log-log slope vs d: {:+.4} (r2 {:.4})", f.slope, f.r_squared);
        }
        (None, Some(note)) => {
            let _ = writeln!(s, "{note}");
        }
        (None, None) => {}
    }
    fs::write(dir.join("sweep_report.txt"), s)?;
    Ok(())
}
