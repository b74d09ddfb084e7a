use std::fmt::Write as _;

use serde::Serialize;

use crate::effective::FluidState;
use crate::error::Result;
use crate::lp::{lr_norm, sum_space_from_levels, weight_levels, DyadicFilterBank};
use crate::paradiff::jacobian;
use crate::spectral::{Field, ViscosityParams};

use super::config::{MonitorConstants, SolverConfig};
use super::data::choose_m;

/// Running `sup_t` and `int_0^t` (trapezoid) of per-level values.
#[derive(Debug, Clone, Default)]
pub struct LevelAccumulator {
    pub sup: Vec<f64>,
    pub int: Vec<f64>,
    prev: Option<(f64, Vec<f64>)>,
}

impl LevelAccumulator {
    pub fn push(&mut self, t: f64, levels: &[f64]) {
        if self.sup.is_empty() {
            self.sup = vec![0.0; levels.len()];
            self.int = vec![0.0; levels.len()];
        }
        for (s, v) in self.sup.iter_mut().zip(levels) {
            *s = s.max(*v);
        }
        if let Some((t0, prev)) = &self.prev {
            let h = t - t0;
            for ((acc, a), b) in self.int.iter_mut().zip(prev).zip(levels) {
                *acc += 0.5 * h * (a + b);
            }
        }
        self.prev = Some((t, levels.to_vec()));
    }

    /// `L~^inf_t` norm after weighting level `l` by `2^{ls}`.
    pub fn sup_norm(&self, s: f64, r: f64) -> f64 {
        lr_norm(&weight_levels(&self.sup, s), r)
    }

    /// `L~^1_t` norm after weighting level `l` by `2^{ls}`.
    pub fn int_norm(&self, s: f64, r: f64) -> f64 {
        lr_norm(&weight_levels(&self.int, s), r)
    }
}

/// Scalar running integral by the trapezoid rule.
#[derive(Debug, Clone, Copy, Default)]
struct Integral {
    value: f64,
    prev: Option<(f64, f64)>,
}

impl Integral {
    fn push(&mut self, t: f64, v: f64) -> f64 {
        if let Some((t0, v0)) = self.prev {
            self.value += 0.5 * (t - t0) * (v0 + v);
        }
        self.prev = Some((t, v));
        self.value
    }
}

/// A measured quantity against its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub id: &'static str,
    pub value: f64,
    pub threshold: f64,
}

impl Bound {
    pub fn holds(&self) -> bool {
        self.value <= self.threshold * (1.0 + 1e-12) || self.value == 0.0
    }

    pub fn margin(&self) -> f64 {
        crate::report::ratio(self.value, self.threshold)
    }
}

/// Identifiers of the eight bootstrap hypotheses, in order.
pub const HYPOTHESIS_IDS: [&str; 8] = [
    "tail-smallness",
    "time-smallness",
    "density-bounds",
    "density-norm",
    "linear-smallness",
    "effective-remainder",
    "potential-bound",
    "gradient-bound",
];

/// Monitor values at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorRow {
    pub t: f64,
    pub hypotheses: Vec<Bound>,
    /// `|v|_{L~inf B^{N/p+1}_{p,1}}`, logged next to the `p1` form.
    pub potential_p_variant: f64,
    pub v_acc: f64,
    pub w_acc: f64,
    pub z_acc: f64,
    pub u_acc: f64,
    pub inf_one_plus_a: f64,
    /// `inf (1 + S_m a)`.
    pub inf_truncated: f64,
    pub mass: f64,
}

impl MonitorRow {
    pub fn all_hold(&self) -> bool {
        self.hypotheses.iter().all(Bound::holds)
    }
}

/// Data functionals and constants fixed at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorSetup {
    pub m: i32,
    pub c: f64,
    pub big_c: f64,
    pub c_prime: f64,
    pub kappa: f64,
    pub eta: f64,
    pub eta_auto: bool,
    pub b_under: f64,
    pub b_bar: f64,
    pub nu_under: f64,
    pub nu_bar: f64,
    /// `|a0|_{B^{N/p}_{p,1}}`.
    pub a0_norm: f64,
    /// `1 + 2 |a0|_{B^{N/p}_{p,1}}`.
    pub a0_bound: f64,
    /// `|u0|_{B^{N/p-1}_{p,1}} + |a0|_{B^{N/p+1}_{p,1}} + |f|_{L^1_T B^{N/p-1}_{p,1}}`.
    pub u0_bound: f64,
    /// `2 C U0 + 4 C nu_bar A0`.
    pub u0_tilde: f64,
    /// Left side of the data smallness condition on `eta`.
    pub data_smallness: f64,
}

impl MonitorSetup {
    pub fn new(
        a0: &Field,
        u0: &Field,
        f: Option<&Field>,
        config: &SolverConfig,
        bank: &DyadicFilterBank,
        linear_smallness: f64,
    ) -> Self {
        let n = a0.grid().dim() as f64;
        let (p, p1) = (config.p, config.p1);
        let consts: MonitorConstants = config.monitor;
        let visc: ViscosityParams = config.visc;
        let b_under = 1.0 + a0.min();
        let b_bar = 1.0 + a0.max();
        let nu_under = visc.nu_under(b_under);
        let a_prof = bank.level_norms(a0, p);
        let u_prof = bank.level_norms(u0, p1);
        let f_prof = f.map(|f| bank.level_norms(f, p1));
        let a0_norm = a_prof.besov(n / p, 1.0);
        let a0_bound = 1.0 + 2.0 * a0_norm;
        let f_l1 = f.map_or(0.0, |f| config.horizon * bank.level_norms(f, p).besov(n / p - 1.0, 1.0));
        let u0_bound = bank.level_norms(u0, p).besov(n / p - 1.0, 1.0) + a_prof.besov(n / p + 1.0, 1.0) + f_l1;
        let u0_tilde = 2.0 * consts.big_c * u0_bound + 4.0 * consts.big_c * visc.nu_bar() * a0_bound;

        let rate = consts.kappa * visc.min_eigen() * config.horizon;
        let mut data_smallness = 0.0;
        for i in 0..bank.level_count() {
            let l = i as f64 - 1.0;
            let sat = -(-rate * (4f64).powf(l)).exp_m1();
            let f_l = f_prof.as_ref().map_or(0.0, |fp| config.horizon * fp.norms[i]);
            data_smallness += sat
                * ((2f64).powf(l * (n / p1 - 1.0)) * (u_prof.norms[i] + f_l)
                    + (2f64).powf(l * (n / p + 1.0)) * a_prof.norms[i]);
        }
        let scale = consts.kappa * visc.min_eigen();
        let (eta, eta_auto) = match consts.eta {
            Some(e) => (e, false),
            None => (2.0 * (data_smallness / scale).max(linear_smallness), true),
        };
        Self {
            m: choose_m(a0, consts.c, p, &visc, bank),
            c: consts.c,
            big_c: consts.big_c,
            c_prime: consts.c_prime,
            kappa: consts.kappa,
            eta,
            eta_auto,
            b_under,
            b_bar,
            nu_under,
            nu_bar: visc.nu_bar(),
            a0_norm,
            a0_bound,
            u0_bound,
            u0_tilde,
            data_smallness,
        }
    }
}

/// `|u_L|_{L^1_t(B^{N/p1+1}_{p1,1} + B^{N/p1+3}_{p1,1})}` from level integrals.
pub fn linear_smallness(acc: &LevelAccumulator, n: f64, p1: f64) -> f64 {
    sum_space_from_levels(&weight_levels(&acc.int, n / p1 + 1.0), 1.0, &weight_levels(&acc.int, n / p1 + 3.0), 1.0)
        .value
}

/// Live evaluation of the eight hypotheses and the accumulators along a run.
#[derive(Debug, Clone)]
pub struct HypothesisMonitor {
    pub setup: MonitorSetup,
    pub rows: Vec<MonitorRow>,
    dim: f64,
    p: f64,
    p1: f64,
    a: LevelAccumulator,
    tail: LevelAccumulator,
    linear: LevelAccumulator,
    remainder: LevelAccumulator,
    potential: LevelAccumulator,
    potential_p: LevelAccumulator,
    gradient: LevelAccumulator,
    v_int: Integral,
    w_int: Integral,
    z_int: Integral,
    u_int: Integral,
    density_ratio: f64,
    inf_truncated: f64,
}

impl HypothesisMonitor {
    pub fn new(setup: MonitorSetup, dim: usize, p: f64, p1: f64) -> Self {
        Self {
            setup,
            rows: Vec::new(),
            dim: dim as f64,
            p,
            p1,
            a: LevelAccumulator::default(),
            tail: LevelAccumulator::default(),
            linear: LevelAccumulator::default(),
            remainder: LevelAccumulator::default(),
            potential: LevelAccumulator::default(),
            potential_p: LevelAccumulator::default(),
            gradient: LevelAccumulator::default(),
            v_int: Integral::default(),
            w_int: Integral::default(),
            z_int: Integral::default(),
            u_int: Integral::default(),
            density_ratio: 0.0,
            inf_truncated: f64::INFINITY,
        }
    }

    /// Records the state at time `t` given the linear reference `u_L(t)`.
    pub fn observe(
        &mut self,
        t: f64,
        state: &FluidState,
        u_lin: &Field,
        bank: &DyadicFilterBank,
    ) -> Result<&MonitorRow> {
        let (n, p, p1) = (self.dim, self.p, self.p1);
        let s = self.setup;
        let nu = state.visc.nu();
        let a = state.a();
        let v = state.compute_v()?;

        let a_prof = bank.level_norms(&a, p);
        self.a.push(t, &a_prof.norms);
        let high = &a - &bank.low_pass(&a, s.m);
        self.tail.push(t, &bank.level_norms(&high, p).norms);
        self.linear.push(t, &bank.level_norms(u_lin, p1).norms);
        let remainder = (&state.u - u_lin).axpy(-1.0 / nu, &v);
        self.remainder.push(t, &bank.level_norms(&remainder, p1).norms);
        self.potential.push(t, &bank.level_norms(&v, p1).norms);
        self.potential_p.push(t, &bank.level_norms(&v, p).norms);
        let jac = jacobian(&state.u);
        self.gradient.push(t, &bank.level_norms(&jac, p1).norms);

        let one_plus_a = state.inverse_density();
        let (lo, hi) = (one_plus_a.min(), one_plus_a.max());
        self.density_ratio = self.density_ratio.max(s.b_under / (2.0 * lo)).max(hi / (2.0 * s.b_bar));
        self.inf_truncated = self.inf_truncated.min(1.0 + bank.low_pass(&a, s.m).min());

        let transport = u_lin.axpy(1.0 / nu, &v);
        let v_acc = self.v_int.push(t, bank.level_norms(&transport, p).besov(n / p + 1.0, 1.0));
        let w_acc = self.w_int.push(t, bank.level_norms(&state.u, p).besov(n / p + 1.0, 1.0));
        let a_now = a_prof.besov(n / p, 1.0);
        let z_scale = (4f64).powi(s.m) * s.nu_bar * s.nu_bar / s.nu_under;
        let z_acc = z_scale * self.z_int.push(t, a_now * a_now);
        let u_acc = self.u_int.push(t, jac.max_abs());

        let a_sup = self.a.sup_norm(n / p, 1.0);
        let rem_sup = sum_space_from_levels(
            &weight_levels(&self.remainder.sup, n / p1 - 1.0),
            1.0,
            &weight_levels(&self.remainder.sup, n / p1 + 1.0),
            1.0,
        )
        .value;
        let rem_int = sum_space_from_levels(
            &weight_levels(&self.remainder.int, n / p1 + 1.0),
            1.0,
            &weight_levels(&self.remainder.int, n / p1 + 2.0),
            1.0,
        )
        .value;
        let grad_levels: Vec<f64> = self.gradient.sup.iter().zip(&self.gradient.int).map(|(a, b)| a.min(*b)).collect();

        let hypotheses = vec![
            Bound {
                id: HYPOTHESIS_IDS[0],
                value: self.tail.sup_norm(n / p, 1.0),
                threshold: s.c * s.nu_under / s.nu_bar,
            },
            Bound {
                id: HYPOTHESIS_IDS[1],
                value: s.big_c * s.nu_bar * s.nu_bar * t * a_sup * a_sup,
                threshold: (4f64).powi(-s.m) * s.nu_under,
            },
            Bound { id: HYPOTHESIS_IDS[2], value: self.density_ratio, threshold: 1.0 },
            Bound { id: HYPOTHESIS_IDS[3], value: a_sup, threshold: s.a0_bound },
            Bound { id: HYPOTHESIS_IDS[4], value: linear_smallness(&self.linear, n, p1), threshold: s.eta },
            Bound { id: HYPOTHESIS_IDS[5], value: rem_sup + s.nu_under * rem_int, threshold: s.u0_tilde * s.eta },
            Bound {
                id: HYPOTHESIS_IDS[6],
                value: self.potential.sup_norm(n / p1 + 1.0, 1.0),
                threshold: s.c_prime * s.a0_bound,
            },
            Bound {
                id: HYPOTHESIS_IDS[7],
                value: lr_norm(&weight_levels(&grad_levels, n / p1), 1.0),
                threshold: (s.u0_tilde / s.nu_under + 1.0) * s.eta,
            },
        ];
        self.rows.push(MonitorRow {
            t,
            hypotheses,
            potential_p_variant: self.potential_p.sup_norm(n / p + 1.0, 1.0),
            v_acc,
            w_acc,
            z_acc,
            u_acc,
            inf_one_plus_a: lo,
            inf_truncated: self.inf_truncated,
            mass: state.rho.integral(0),
        });
        Ok(self.rows.last().expect("just pushed"))
    }

    pub fn last(&self) -> Option<&MonitorRow> {
        self.rows.last()
    }

    /// Every hypothesis held at every observed time.
    pub fn all_green(&self) -> bool {
        self.rows.iter().all(MonitorRow::all_hold)
    }

    /// First `(time, id)` at which a hypothesis failed.
    pub fn first_violation(&self) -> Option<(f64, &'static str)> {
        self.rows.iter().find_map(|r| r.hypotheses.iter().find(|b| !b.holds()).map(|b| (r.t, b.id)))
    }

    /// The truncated coefficient stays above a quarter of the density lower bound.
    pub fn truncated_floor(&self) -> Bound {
        Bound { id: "truncated-density-floor", value: self.setup.b_under / 4.0, threshold: self.inf_truncated }
    }

    /// Closing conditions on `(eta, T)`; logged, not enforced.
    pub fn side_conditions(&self, horizon: f64) -> Vec<Bound> {
        let s = self.setup;
        let (c, cp) = (s.big_c, s.c_prime);
        let closure = 1.0 + s.u0_tilde / s.nu_under;
        let u0 = s.u0_bound;
        let nu_min = s.nu_under / s.b_under;
        vec![
            Bound {
                id: "exponential-budget",
                value: c * closure * s.eta + cp / s.nu_under * s.a0_bound * horizon,
                threshold: std::f64::consts::LN_2,
            },
            Bound { id: "data-smallness", value: s.data_smallness, threshold: s.kappa * s.eta * nu_min },
            Bound {
                id: "remainder-closure",
                value: 2.0 * c * (s.nu_bar * s.a0_bound + u0) * s.eta
                    + c * horizon * s.a0_bound * (1.0 + s.a0_bound)
                    + horizon.sqrt() * s.a0_bound * u0,
                threshold: c * s.nu_bar * s.eta,
            },
            Bound {
                id: "tail-closure",
                value: c / std::f64::consts::LN_2 * (1.0 + s.a0_norm) * closure * s.eta,
                threshold: s.c * s.nu_under / (2.0 * s.nu_bar),
            },
            Bound {
                id: "low-frequency-closure",
                value: c
                    * (2f64).powi(s.m)
                    * horizon.sqrt()
                    * s.a0_norm
                    * (s.eta * (u0 + s.u0_tilde * s.eta) * closure).sqrt(),
                threshold: s.b_under / 8.0,
            },
        ]
    }

    /// Monitor log: time, value/threshold per hypothesis, accumulators,
    /// `inf(1 + a)` and mass.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for id in HYPOTHESIS_IDS {
            let _ = write!(out, ",{id}_value,{id}_threshold");
        }
        out.push_str(",potential_p_variant,V,W,Z_m,U,inf_one_plus_a,inf_truncated,mass\n");
        for r in &self.rows {
            let _ = write!(out, "{:.17e}", r.t);
            for h in &r.hypotheses {
                let _ = write!(out, ",{:.17e},{:.17e}", h.value, h.threshold);
            }
            let _ = writeln!(
                out,
                ",{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.potential_p_variant, r.v_acc, r.w_acc, r.z_acc, r.u_acc, r.inf_one_plus_a, r.inf_truncated, r.mass
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulator_tracks_sup_and_integral() {
        let mut acc = LevelAccumulator::default();
        acc.push(0.0, &[1.0, 0.0]);
        acc.push(0.5, &[0.5, 2.0]);
        acc.push(1.0, &[0.0, 0.0]);
        assert_eq!(acc.sup, vec![1.0, 2.0]);
        assert!((acc.int[0] - 0.5).abs() < 1e-15);
        assert!((acc.int[1] - 1.0).abs() < 1e-15);
        // Level -1 carries weight 2^{-s}.
        assert!((acc.sup_norm(1.0, 1.0) - (0.5 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn bound_comparison() {
        let b = Bound { id: "x", value: 0.0, threshold: 0.0 };
        assert!(b.holds());
        let b = Bound { id: "x", value: 2.0, threshold: 1.0 };
        assert!(!b.holds());
        assert_eq!(b.margin(), 2.0);
    }
}
