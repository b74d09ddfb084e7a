use std::fmt::Write as _;

use serde::Serialize;

use crate::effective::FluidState;
use crate::error::{Error, Result};
use crate::linear::step_count;
use crate::lp::{sum_space_from_levels, weight_levels, DyadicFilterBank};
use crate::spectral::{divergence, partial, Field};

use super::config::{Forcing, GateReport, SolverConfig};
use super::data::{linear_reference, smooth_data, InitialData};
use super::monitor::{linear_smallness, HypothesisMonitor, LevelAccumulator, MonitorSetup};
use super::step::step;

/// Norms and integrals of the state at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    /// `|a|_{B^{N/p}_{p,1}}`.
    pub a_norm: f64,
    /// `|u|` in `B^{N/p1-1}_{p1,1} + B^{N/p+1}_{p,1}`.
    pub u_norm: f64,
    /// `|v1|_{B^{N/p1-1}_{p1,1}}`.
    pub v1_norm: f64,
    pub mass: f64,
    pub inf_one_plus_a: f64,
    pub min_rho: f64,
    /// `int rho |u|^2 / 2`.
    pub kinetic: f64,
    /// `int Pi(rho)`.
    pub potential: f64,
    /// `int mu |grad u|^2 + (lambda + mu) (div u)^2`.
    pub dissipation: f64,
}

/// Stored state.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub rho: Field,
    pub u: Field,
}

/// Trajectory, monitor log and diagnostics of one nonlinear run.
#[derive(Debug)]
pub struct RunOutput {
    pub gates: GateReport,
    /// Data actually used (after smoothing).
    pub data: InitialData,
    pub steps: usize,
    pub h: f64,
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub monitor: HypothesisMonitor,
    pub final_state: FluidState,
    /// Error that stopped the run before the horizon.
    pub abort: Option<Error>,
}

impl RunOutput {
    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }

    pub fn final_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    /// Per-step norms as CSV.
    pub fn records_csv(&self) -> String {
        let mut out =
            String::from("t,a_norm,u_norm,v1_norm,mass,inf_one_plus_a,min_rho,kinetic,potential,dissipation\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.t,
                r.a_norm,
                r.u_norm,
                r.v1_norm,
                r.mass,
                r.inf_one_plus_a,
                r.min_rho,
                r.kinetic,
                r.potential,
                r.dissipation
            );
        }
        out
    }

    /// `max_t |int rho(t) - int rho0| / int rho0`.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.records.first().map_or(0.0, |r| r.mass);
        self.records.iter().map(|r| ((r.mass - m0) / m0).abs()).fold(0.0, f64::max)
    }
}

/// `int mu |grad u|^2 + (lambda + mu) (div u)^2`, by quadrature on the grid.
pub fn dissipation(state: &FluidState) -> Result<f64> {
    let dim = state.u.grid().dim();
    let mut grad2 = 0.0;
    for j in 0..dim {
        let d = partial(&state.u, j);
        grad2 += d.dot(&d).integral(0);
    }
    let div = divergence(&state.u)?;
    Ok(state.visc.mu * grad2 + (state.visc.lambda + state.visc.mu) * div.dot(&div).integral(0))
}

fn record(t: f64, state: &FluidState, config: &SolverConfig, bank: &DyadicFilterBank) -> Result<StepRecord> {
    let n = config.grid.dim() as f64;
    let (p, p1) = (config.p, config.p1);
    let a = state.a();
    let u_p1 = bank.level_norms(&state.u, p1).norms;
    let u_p = bank.level_norms(&state.u, p).norms;
    let u_norm =
        sum_space_from_levels(&weight_levels(&u_p1, n / p1 - 1.0), 1.0, &weight_levels(&u_p, n / p + 1.0), 1.0).value;
    let v1 = state.to_effective()?;
    let speed2 = state.u.dot(&state.u);
    Ok(StepRecord {
        t,
        a_norm: bank.level_norms(&a, p).besov(n / p, 1.0),
        u_norm,
        v1_norm: bank.level_norms(&v1, p1).besov(n / p1 - 1.0, 1.0),
        mass: state.rho.integral(0),
        inf_one_plus_a: 1.0 + a.min(),
        min_rho: state.rho.min(),
        kinetic: 0.5 * (&state.rho * &speed2).integral(0),
        potential: state.rho.map(|r| state.law.potential(r)).integral(0),
        dissipation: dissipation(state)?,
    })
}

/// Validates the configuration and applies the data smoothing.
pub fn prepare(
    config: &SolverConfig,
    data: &InitialData,
    bank: &DyadicFilterBank,
) -> Result<(GateReport, InitialData)> {
    let gates = config.validate()?;
    if data.rho0.grid() != &config.grid || data.u0.grid() != &config.grid {
        return Err(Error::GridMismatch);
    }
    let data = match config.smoothing {
        None => data.clone(),
        Some(n) => {
            let (a0, u0, _) = smooth_data(&data.a0(), &data.u0, None, n, bank);
            InitialData::from_a(&a0, u0)?
        }
    };
    Ok((gates, data))
}

/// Smoothed forcing, matching the data smoothing.
pub(crate) fn effective_forcing(config: &SolverConfig, bank: &DyadicFilterBank) -> Option<Field> {
    let f = config.forcing.field()?;
    Some(match config.smoothing {
        Some(n) => bank.low_pass(f, n),
        None => f.clone(),
    })
}

/// Advances to the horizon and fails on the first error.
pub fn run(config: &SolverConfig, data: &InitialData) -> Result<RunOutput> {
    let mut out = run_partial(config, data)?;
    match out.abort.take() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Advances to the horizon or to the first step error, which is recorded in
/// `abort`. Only an invalid configuration is returned as an error.
pub fn run_partial(config: &SolverConfig, data: &InitialData) -> Result<RunOutput> {
    let bank = DyadicFilterBank::new(&config.grid, config.alpha)?;
    let (gates, data) = prepare(config, data, &bank)?;
    let (steps, h) = step_count(config.horizon, config.dt)?;
    let forcing = effective_forcing(config, &bank);

    let mut linear_config = config.clone();
    linear_config.forcing = forcing.clone().map_or(Forcing::Zero, Forcing::Steady);
    let u_lin = linear_reference(&linear_config, &data)?;
    let n = config.grid.dim() as f64;
    let mut lin_acc = LevelAccumulator::default();
    for (i, frame) in u_lin.frames.iter().enumerate() {
        lin_acc.push(u_lin.time(i), &bank.level_norms(frame, config.p1).norms);
    }
    let a0 = data.a0();
    let setup =
        MonitorSetup::new(&a0, &data.u0, forcing.as_ref(), config, &bank, linear_smallness(&lin_acc, n, config.p1));
    let mut monitor = HypothesisMonitor::new(setup, config.grid.dim(), config.p, config.p1);

    let mut state =
        FluidState::new(data.rho0.clone(), data.u0.clone(), config.visc, config.law)?.with_dealias(config.dealias);
    let floor = config.vacuum_floor * config.law.rho_bar;
    let mut records = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    let mut abort = None;

    let mut observe = |i: usize, state: &FluidState, monitor: &mut HypothesisMonitor| -> Result<()> {
        let t = i as f64 * h;
        records.push(record(t, state, config, &bank)?);
        monitor.observe(t, state, &u_lin.frames[i], &bank)?;
        if i.is_multiple_of(config.snapshot_every) || i == steps {
            snapshots.push(Snapshot { t, rho: state.rho.clone(), u: state.u.clone() });
        }
        Ok(())
    };
    observe(0, &state, &mut monitor)?;
    for i in 0..steps {
        let t = i as f64 * h;
        let next = match step(&state, t, h, forcing.as_ref()) {
            Ok(s) => s,
            Err(e) => {
                abort = Some(e);
                break;
            }
        };
        let minimum = next.rho.min();
        let below = minimum < floor;
        state = next;
        if let Err(e) = observe(i + 1, &state, &mut monitor) {
            abort = Some(e);
            break;
        }
        if below {
            abort = Some(Error::VacuumApproach { time: t + h, minimum, floor });
            break;
        }
    }
    if abort.is_some() {
        if let Some(last) = records.last() {
            if snapshots.last().is_none_or(|s| s.t < last.t) {
                snapshots.push(Snapshot { t: last.t, rho: state.rho.clone(), u: state.u.clone() });
            }
        }
    }
    Ok(RunOutput { gates, data, steps, h, records, snapshots, monitor, final_state: state, abort })
}
