use std::fmt::Write as _;

use serde::Serialize;

use crate::effective::FluidState;
use crate::error::{Error, Result};
use crate::linear::step_count;
use crate::lp::DyadicFilterBank;
use crate::rng::{Ensemble, SmoothFieldSpec};
use crate::spectral::Field;

use super::config::SolverConfig;
use super::data::InitialData;
use super::run::{effective_forcing, prepare};
use super::step::step;

/// Seed of the perturbation direction.
pub const PROBE_SEED: u64 = 0x7719;

/// Distance between two trajectories started `delta` apart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub delta: f64,
    pub times: Vec<f64>,
    /// `|a - a'|_{B^{N/p-1}_{p,1}}`.
    pub da: Vec<f64>,
    /// `|v1 - v1'|_{B^{N/p-1}_{p,1}}`.
    pub dv1: Vec<f64>,
    /// Divergence `da + dv1` at the horizon.
    pub final_divergence: f64,
    /// `max_t ln(D(t) / D(0)) / t`, so `D(t) <= D(0) e^{C t}`; zero when `D`
    /// vanishes.
    pub growth_rate: f64,
}

impl ProbeReport {
    pub fn divergence(&self) -> Vec<f64> {
        self.da.iter().zip(&self.dv1).map(|(a, b)| a + b).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,da,dv1\n");
        for ((t, a), v) in self.times.iter().zip(&self.da).zip(&self.dv1) {
            let _ = writeln!(out, "{t:.17e},{a:.17e},{v:.17e}");
        }
        out
    }
}

/// Unit perturbation direction `(da0, du0)` in `B^{N/p-1}_{p,1}`.
pub fn perturbation_direction(config: &SolverConfig, bank: &DyadicFilterBank) -> (Field, Field) {
    let grid = &config.grid;
    let s = grid.dim() as f64 / config.p - 1.0;
    let ens = Ensemble::new(PROBE_SEED, 1).with_shape(SmoothFieldSpec {
        decay: 4.0,
        cutoff: Some(grid.dealias_limit().min(8)),
        mean_free: true,
    });
    let unit = |f: Field| {
        let norm = bank.level_norms(&f, config.p).besov(s, 1.0);
        f.scale(1.0 / norm)
    };
    (unit(ens.field(grid, 0, 0, 1)), unit(ens.field(grid, 0, 1, grid.dim())))
}

/// Runs the data and its `delta` perturbation side by side.
pub fn twin_run_probe(config: &SolverConfig, data: &InitialData, delta: f64) -> Result<ProbeReport> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("perturbation size must be non-negative, got {delta}")));
    }
    let bank = DyadicFilterBank::new(&config.grid, config.alpha)?;
    let (_, data) = prepare(config, data, &bank)?;
    let (da0, du0) = perturbation_direction(config, &bank);
    let a0 = data.a0();
    let twin = InitialData::from_a(&a0.axpy(delta, &da0), data.u0.axpy(delta, &du0))?;
    let (steps, h) = step_count(config.horizon, config.dt)?;
    let forcing = effective_forcing(config, &bank);
    let make = |d: &InitialData| -> Result<FluidState> {
        Ok(FluidState::new(d.rho0.clone(), d.u0.clone(), config.visc, config.law)?.with_dealias(config.dealias))
    };
    let (mut x, mut y) = (make(&data)?, make(&twin)?);
    let s = config.grid.dim() as f64 / config.p - 1.0;
    let dist = |x: &FluidState, y: &FluidState| -> Result<(f64, f64)> {
        let da = &x.a() - &y.a();
        let dv = &x.to_effective()? - &y.to_effective()?;
        Ok((bank.level_norms(&da, config.p).besov(s, 1.0), bank.level_norms(&dv, config.p).besov(s, 1.0)))
    };
    let mut report = ProbeReport {
        delta,
        times: Vec::with_capacity(steps + 1),
        da: Vec::with_capacity(steps + 1),
        dv1: Vec::with_capacity(steps + 1),
        final_divergence: 0.0,
        growth_rate: 0.0,
    };
    let mut push = |t: f64, d: (f64, f64)| {
        report.times.push(t);
        report.da.push(d.0);
        report.dv1.push(d.1);
    };
    push(0.0, dist(&x, &y)?);
    for i in 0..steps {
        let t = i as f64 * h;
        x = step(&x, t, h, forcing.as_ref())?;
        y = step(&y, t, h, forcing.as_ref())?;
        push(t + h, dist(&x, &y)?);
    }
    let d = report.divergence();
    report.final_divergence = *d.last().expect("at least one sample");
    if d[0] > 0.0 {
        report.growth_rate =
            report.times[1..].iter().zip(&d[1..]).map(|(t, v)| (v / d[0]).ln() / t).fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(report)
}

/// Least-squares slope of `ln D(T)` against `ln delta`.
pub fn divergence_slope(reports: &[ProbeReport]) -> f64 {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.delta > 0.0 && r.final_divergence > 0.0)
        .map(|r| (r.delta.ln(), r.final_divergence.ln()))
        .collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
