use rayon::prelude::*;

use crate::error::Result;
use crate::ns::{continuation_monitor, energy_diagnostic, run_partial, twin_run_probe, Bound};
use crate::spectral::snapshot;
use crate::suites::{run_suite, Check, SuiteResult};

use super::config::{ExperimentSpec, Mode};
use super::report::{suite_report, Manifest, Report};

/// Outcome of one experiment before it is written.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub report: Report,
    /// Console lines; not written to disk.
    pub console: Vec<String>,
}

fn logged(b: &Bound) -> Check {
    Check { name: b.id.to_string(), value: b.value, bound: format!("<= {:e}", b.threshold), passed: b.holds() }
}

/// Runs the selected mode and collects its reports and verdicts.
pub fn run_experiment(spec: &ExperimentSpec) -> Outcome {
    let mut manifest = Manifest::new(spec.mode.name(), Some(spec.seed));
    manifest.warnings = spec.warnings.clone();
    let mut report = Report::default();
    let mut console = Vec::new();
    let result = match spec.mode {
        Mode::Verify => verify(spec, &mut manifest, &mut report, &mut console),
        Mode::Simulate => simulate(spec, &mut manifest, &mut report, &mut console),
        Mode::Probe => probe(spec, &mut manifest, &mut report, &mut console),
    };
    if let Err(e) = result {
        manifest.error = Some(e.to_string());
    }
    manifest.finish();
    Outcome { manifest, report, console }
}

fn verify(
    spec: &ExperimentSpec,
    manifest: &mut Manifest,
    report: &mut Report,
    console: &mut Vec<String>,
) -> Result<()> {
    let runs: Vec<Result<SuiteResult>> = spec.suites.par_iter().map(|&s| run_suite(s, &spec.options)).collect();
    let mut results = Vec::with_capacity(runs.len());
    for (suite, r) in spec.suites.iter().zip(runs) {
        match r {
            Ok(r) => {
                console.push(format!("{} [{:.1} s]", r.summary_line(), r.seconds));
                results.push(r);
            }
            Err(e) => {
                console.push(format!("criterion {} {}: ERROR {e}", suite.number(), suite.name()));
                manifest.assertions.push(Check::flag(format!("{} runs", suite.name()), false));
            }
        }
    }
    for r in &results {
        for c in &r.checks {
            let mut c = c.clone();
            c.name = format!("{}: {}", r.suite.name(), c.name);
            manifest.assertions.push(c);
        }
    }
    *report = suite_report(&results);
    Ok(())
}

fn simulate(
    spec: &ExperimentSpec,
    manifest: &mut Manifest,
    report: &mut Report,
    console: &mut Vec<String>,
) -> Result<()> {
    let cfg = &spec.solver;
    let data = spec.data.build(cfg)?;
    let out = run_partial(cfg, &data)?;
    report.add("records.csv", out.records_csv());
    report.add("monitor.csv", out.monitor.to_csv());
    for (k, s) in out.snapshots.iter().enumerate() {
        report.add(format!("snapshots/rho_{k:05}.snap"), snapshot::encode(&s.rho));
        report.add(format!("snapshots/u_{k:05}.snap"), snapshot::encode(&s.u));
    }
    let times: String = out.snapshots.iter().enumerate().map(|(k, s)| format!("{k},{:.17e}\n", s.t)).collect();
    report.add("snapshots/times.csv", format!("index,t\n{times}"));

    let verdict = continuation_monitor(&out, cfg);
    manifest.assertions.push(Check::flag("run completes", out.completed()));
    manifest.assertions.push(Check::below("mass drift", out.mass_drift(), 1e-8));
    manifest.assertions.push(Check::flag("continuable", verdict.continuable));
    for f in &verdict.failed {
        manifest.logged.push(Check::flag(format!("continuation criterion {f}"), false));
    }
    if let Some(row) = out.monitor.last() {
        manifest.logged.extend(row.hypotheses.iter().map(logged));
    }
    if let Some((t, id)) = out.monitor.first_violation() {
        console.push(format!("hypothesis {id} first violated at t = {t:.4e}"));
    }
    manifest.logged.push(logged(&out.monitor.truncated_floor()));
    manifest.logged.extend(out.monitor.side_conditions(cfg.horizon).iter().map(logged));
    match energy_diagnostic(&out, cfg) {
        Ok(e) => {
            report.add("energy.csv", e.to_csv());
            manifest.logged.push(Check::below("energy budget relative increase", e.max_budget_increase, 1e-6));
            manifest.logged.push(Check::flag("energy inequality", e.inequality_holds));
        }
        Err(e) => console.push(format!("energy diagnostic unavailable: {e}")),
    }
    if let Some(e) = &out.abort {
        manifest.error = Some(e.to_string());
    }
    console.push(format!(
        "simulated to t = {:.4e} in {} steps; sup |a| = {:.4e}, mass drift = {:.2e}",
        out.final_time(),
        out.records.len().saturating_sub(1),
        verdict.a_sup,
        out.mass_drift()
    ));
    Ok(())
}

fn probe(spec: &ExperimentSpec, manifest: &mut Manifest, report: &mut Report, console: &mut Vec<String>) -> Result<()> {
    let cfg = &spec.solver;
    let delta = spec.delta.unwrap_or(0.0);
    let data = spec.data.build(cfg)?;
    let rep = twin_run_probe(cfg, &data, delta)?;
    report.add("probe.csv", rep.to_csv());
    let d = rep.divergence();
    manifest.assertions.push(Check::flag("divergence finite", d.iter().all(|v| v.is_finite())));
    if delta == 0.0 {
        manifest.assertions.push(Check::flag("zero perturbation gives zero divergence", d.iter().all(|&v| v == 0.0)));
    }
    manifest.logged.push(Check {
        name: "final divergence".into(),
        value: rep.final_divergence,
        bound: "reported".into(),
        passed: true,
    });
    manifest.logged.push(Check {
        name: "growth rate".into(),
        value: rep.growth_rate,
        bound: "reported".into(),
        passed: true,
    });
    console.push(format!(
        "delta = {delta:e}: divergence at T = {:.6e}, growth rate = {:.6e}",
        rep.final_divergence, rep.growth_rate
    ));
    Ok(())
}
