use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{divergence, partial, Field};

use super::config::SolverConfig;
use super::run::RunOutput;

/// Verdict of the continuation criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationVerdict {
    /// `sup_t |a|_{B^{N/p}_{p,1}}`.
    pub a_sup: f64,
    pub a_bound: f64,
    pub a_bounded: bool,
    /// `inf_t min(inf rho / rho_bar, inf (1 + a))`.
    pub density_inf: f64,
    pub floor: f64,
    pub density_bounded: bool,
    /// The run stopped at the vacuum floor.
    pub vacuum_abort: bool,
    /// A zero norm threshold can never be met.
    pub degenerate: bool,
    pub continuable: bool,
    /// Names of the failed criteria.
    pub failed: Vec<&'static str>,
}

pub const CRITERION_A_BOUNDED: &str = "a-bounded";
pub const CRITERION_DENSITY: &str = "density-away-from-zero";

/// The solution extends past the final time when `a` stays bounded in the
/// critical norm and the density stays away from zero.
pub fn continuation_monitor(run: &RunOutput, config: &SolverConfig) -> ContinuationVerdict {
    let a_sup = run.records.iter().map(|r| r.a_norm).fold(0.0, f64::max);
    let rho_bar = config.law.rho_bar;
    let density_inf =
        run.records.iter().map(|r| (r.min_rho / rho_bar).min(r.inf_one_plus_a)).fold(f64::INFINITY, f64::min);
    let vacuum_abort = matches!(run.abort, Some(Error::VacuumApproach { .. }));
    let degenerate = config.a_bound <= 0.0;
    let a_bounded = !degenerate && a_sup <= config.a_bound && a_sup.is_finite();
    let density_bounded = !vacuum_abort && density_inf >= config.vacuum_floor;
    let mut failed = Vec::new();
    if !a_bounded {
        failed.push(CRITERION_A_BOUNDED);
    }
    if !density_bounded {
        failed.push(CRITERION_DENSITY);
    }
    ContinuationVerdict {
        a_sup,
        a_bound: config.a_bound,
        a_bounded,
        density_inf,
        floor: config.vacuum_floor,
        density_bounded,
        vacuum_abort,
        degenerate,
        continuable: failed.is_empty(),
        failed,
    }
}

/// Energy terms at one stored time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    /// `(1/p1) int rho |u|^{p1}`.
    pub moment: f64,
    /// Rate of the viscous terms after testing with `u |u|^{p1-2}`.
    pub dissipation_rate: f64,
    /// `int (P - P_bar)(div u |u|^{p1-2} + (p1-2) u_i u_k d_i u_k |u|^{p1-4})`.
    pub pressure_work_rate: f64,
    /// Moment plus the time integrals of dissipation minus pressure work.
    pub lhs: f64,
    /// `int rho |u|^2 / 2`.
    pub kinetic: f64,
    /// `int Pi(rho)`.
    pub potential: f64,
    /// `kinetic + potential + int_0^t (mu |grad u|^2 + (lambda + mu)(div u)^2)`.
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub p1: f64,
    /// `int rho0 |u0|^{p1}`.
    pub rhs: f64,
    /// `lambda <= 4 mu / (N^2 (p1 - 1))`.
    pub viscosity_condition: bool,
    pub rows: Vec<EnergyRow>,
    /// `lhs <= rhs` at every stored time.
    pub inequality_holds: bool,
    /// `max_k (B(t_{k+1}) - B(t_k)) / B(0)`, positive when the budget grows.
    pub max_budget_increase: f64,
}

impl EnergyReport {
    pub fn budget_non_increasing(&self, rel_tol: f64) -> bool {
        self.max_budget_increase <= rel_tol
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,moment,dissipation_rate,pressure_work_rate,lhs,kinetic,potential,budget\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.t, r.moment, r.dissipation_rate, r.pressure_work_rate, r.lhs, r.kinetic, r.potential, r.budget
            );
        }
        out
    }
}

struct Terms {
    moment: f64,
    dissipation: f64,
    pressure_work: f64,
    kinetic: f64,
    potential: f64,
    energy_dissipation: f64,
}

fn terms(rho: &Field, u: &Field, config: &SolverConfig) -> Result<Terms> {
    let grid = u.grid();
    let dim = grid.dim();
    let p1 = config.p1;
    let (mu, lam) = (config.visc.mu, config.visc.lambda + config.visc.mu);
    let du: Vec<Field> = (0..dim).map(|j| partial(u, j)).collect();
    let div = divergence(u)?;
    let pres = config.law.pressure(rho)?;
    let p_bar = config.law.reference_pressure();
    let cell = grid.volume() / grid.len() as f64;

    let (mut moment, mut d1, mut d2, mut d3, mut d4, mut pw) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut kinetic, mut grad2, mut div2) = (0.0, 0.0, 0.0);
    let len = grid.len();
    let mut ui = vec![0.0; dim];
    for x in 0..len {
        for (i, v) in ui.iter_mut().enumerate() {
            *v = u.component(i)[x];
        }
        let s2: f64 = ui.iter().map(|v| v * v).sum();
        let s = s2.sqrt();
        let r = rho.values()[x];
        let dv = div.values()[x];
        // d_j |u|^2 = 2 u_k d_j u_k, and u_i u_k d_i u_k.
        let mut grad_sq = 0.0;
        let mut g = vec![0.0; dim];
        let mut uu_du = 0.0;
        for j in 0..dim {
            for k in 0..dim {
                let d = du[j].component(k)[x];
                grad_sq += d * d;
                g[j] += 2.0 * ui[k] * d;
                uu_du += ui[j] * ui[k] * d;
            }
        }
        let u_dot_g: f64 = ui.iter().zip(&g).map(|(a, b)| a * b).sum();
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let w2 = if s > 0.0 {
            s.powf(p1 - 2.0)
        } else if p1 == 2.0 {
            1.0
        } else {
            0.0
        };
        let w4 = if s > 0.0 { s.powf(p1 - 4.0) } else { 0.0 };
        moment += r * s.powf(p1);
        d1 += w2 * grad_sq;
        d2 += w4 * g2;
        d3 += w2 * dv * dv;
        d4 += w4 * dv * u_dot_g;
        pw += (pres.values()[x] - p_bar) * (dv * w2 + (p1 - 2.0) * uu_du * w4);
        kinetic += 0.5 * r * s2;
        grad2 += grad_sq;
        div2 += dv * dv;
    }
    let dissipation = mu * d1 + (p1 - 2.0) / 4.0 * mu * d2 + lam * d3 + lam * (p1 - 2.0) / 2.0 * d4;
    Ok(Terms {
        moment: moment * cell / p1,
        dissipation: dissipation * cell,
        pressure_work: pw * cell,
        kinetic: kinetic * cell,
        potential: rho.map(|r| config.law.potential(r)).integral(0),
        energy_dissipation: (mu * grad2 + lam * div2) * cell,
    })
}

/// Energy inequality for `rho^{1/p1} u` and, for every `p1`, the
/// kinetic-plus-potential budget, both from the stored snapshots.
///
/// The viscous coefficient of the divergence terms is `lambda + mu`, the one
/// of the Lamé operator.
pub fn energy_diagnostic(run: &RunOutput, config: &SolverConfig) -> Result<EnergyReport> {
    let snaps = &run.snapshots;
    if snaps.is_empty() {
        return Err(Error::EmptySeries);
    }
    let p1 = config.p1;
    let n = config.grid.dim() as f64;
    let all: Vec<Terms> = snaps.iter().map(|s| terms(&s.rho, &s.u, config)).collect::<Result<_>>()?;
    let rhs = p1 * all[0].moment;

    let mut rows = Vec::with_capacity(snaps.len());
    let (mut diss_int, mut work_int, mut energy_int) = (0.0, 0.0, 0.0);
    for (k, (s, tm)) in snaps.iter().zip(&all).enumerate() {
        if k > 0 {
            let dt = s.t - snaps[k - 1].t;
            let prev = &all[k - 1];
            diss_int += 0.5 * dt * (prev.dissipation + tm.dissipation);
            work_int += 0.5 * dt * (prev.pressure_work + tm.pressure_work);
            energy_int += 0.5 * dt * (prev.energy_dissipation + tm.energy_dissipation);
        }
        rows.push(EnergyRow {
            t: s.t,
            moment: tm.moment,
            dissipation_rate: tm.dissipation,
            pressure_work_rate: tm.pressure_work,
            lhs: tm.moment + diss_int - work_int,
            kinetic: tm.kinetic,
            potential: tm.potential,
            budget: tm.kinetic + tm.potential + energy_int,
        });
    }
    let b0 = rows[0].budget;
    let max_budget_increase = rows
        .windows(2)
        .map(|w| {
            let rise = w[1].budget - w[0].budget;
            if b0 == 0.0 {
                rise
            } else {
                rise / b0.abs()
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    Ok(EnergyReport {
        p1,
        rhs,
        viscosity_condition: config.visc.lambda <= 4.0 * config.visc.mu / (n * n * (p1 - 1.0)),
        inequality_holds: rows.iter().all(|r| r.lhs <= rhs * (1.0 + 1e-12)),
        rows,
        max_budget_increase,
    })
}
