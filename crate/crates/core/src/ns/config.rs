use crate::effective::PressureLaw;
use crate::error::{Error, Result};
use crate::lp::DEFAULT_ALPHA;
use crate::spectral::{Field, Grid, ViscosityParams};

/// Momentum forcing.
#[derive(Debug, Clone, Default)]
pub enum Forcing {
    #[default]
    Zero,
    Steady(Field),
}

impl Forcing {
    pub fn field(&self) -> Option<&Field> {
        match self {
            Self::Zero => None,
            Self::Steady(f) => Some(f),
        }
    }
}

/// Constants of the hypothesis thresholds. The bounds they enter are
/// existential, so they are configuration rather than derived values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConstants {
    /// Smallness of the high-frequency part of `a`; also selects `m`.
    pub c: f64,
    /// Generic constant `C`.
    pub big_c: f64,
    /// Embedding constant `C'` bounding the potential `v`.
    pub c_prime: f64,
    /// Smoothing constant of the Lamé semigroup.
    pub kappa: f64,
    /// `eta`; `None` picks twice the smallest admissible value.
    pub eta: Option<f64>,
}

impl Default for MonitorConstants {
    fn default() -> Self {
        Self { c: 0.01, big_c: 1.0, c_prime: 1.0, kappa: 0.1, eta: None }
    }
}

/// Everything a nonlinear run needs besides the initial data.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub grid: Grid,
    pub visc: ViscosityParams,
    pub law: PressureLaw,
    pub horizon: f64,
    pub dt: f64,
    /// Integrability of the density perturbation.
    pub p: f64,
    /// Integrability of the velocity.
    pub p1: f64,
    /// Data are replaced by `S_n` of themselves when set.
    pub smoothing: Option<i32>,
    pub forcing: Forcing,
    pub dealias: bool,
    /// Store a frame every this many steps (the final state is always kept).
    pub snapshot_every: usize,
    /// Abort once `inf rho` drops below this fraction of `rho_bar`.
    pub vacuum_floor: f64,
    pub alpha: f64,
    pub monitor: MonitorConstants,
    /// Bound on `|a|_{L^inf_t B^{N/p}_{p,1}}` for the continuation verdict.
    pub a_bound: f64,
}

impl SolverConfig {
    pub fn new(grid: Grid, visc: ViscosityParams, law: PressureLaw, horizon: f64, dt: f64) -> Self {
        let p = 2.0;
        Self {
            grid,
            visc,
            law,
            horizon,
            dt,
            p,
            p1: p,
            smoothing: None,
            forcing: Forcing::Zero,
            dealias: true,
            snapshot_every: 1,
            vacuum_floor: 0.1,
            alpha: DEFAULT_ALPHA,
            monitor: MonitorConstants::default(),
            a_bound: 10.0,
        }
    }

    /// Checks parameters and the hard index gates; returns the gate report.
    pub fn validate(&self) -> Result<GateReport> {
        let mut problems = Vec::new();
        for check in [self.visc.validate(), self.law.validate()] {
            if let Err(e) = check {
                problems.push(e.to_string());
            }
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            problems.push(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            problems.push(format!("step must lie in (0, horizon], got {}", self.dt));
        }
        if self.snapshot_every == 0 {
            problems.push("snapshot cadence must be at least 1".into());
        }
        if !(self.vacuum_floor > 0.0 && self.vacuum_floor < 1.0) {
            problems.push(format!("vacuum floor must lie in (0, 1), got {}", self.vacuum_floor));
        }
        if let Forcing::Steady(f) = &self.forcing {
            if f.grid() != &self.grid || f.components() != self.grid.dim() {
                problems.push("forcing must be a vector field on the solver grid".into());
            }
        }
        let gates = index_gates(self.grid.dim(), self.p, self.p1, self.law.is_linear());
        problems.extend(gates.violations());
        if problems.is_empty() {
            Ok(gates)
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// One index condition and whether it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub condition: &'static str,
    pub holds: bool,
    /// Hard gates reject the configuration; the others only warn.
    pub hard: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub gates: Vec<Gate>,
}

impl GateReport {
    pub fn violations(&self) -> Vec<String> {
        self.gates
            .iter()
            .filter(|g| g.hard && !g.holds)
            .map(|g| format!("index gate violated: {}", g.condition))
            .collect()
    }

    pub fn warnings(&self) -> Vec<String> {
        self.gates
            .iter()
            .filter(|g| !g.hard && !g.holds)
            .map(|g| format!("index condition not met: {}", g.condition))
            .collect()
    }

    pub fn holds(&self, condition: &str) -> Option<bool> {
        self.gates.iter().find(|g| g.condition == condition).map(|g| g.holds)
    }
}

/// Existence conditions on `(p, p1)` are hard gates; `p <= 2N`,
/// `2N/p - 1 > 0` and the uniqueness condition are warnings. The linear
/// pressure law does not need the positivity condition.
pub fn index_gates(dim: usize, p: f64, p1: f64, linear_law: bool) -> GateReport {
    let n = dim as f64;
    let mut gates = vec![
        Gate { condition: "1 ≤ p₁ ≤ p", holds: p1 >= 1.0 && p1 <= p, hard: true },
        Gate { condition: "1/p₁ ≤ 1/N + 1/p", holds: 1.0 / p1 <= 1.0 / n + 1.0 / p + 1e-15, hard: true },
        Gate { condition: "1/p + 1/p₁ > 1/N", holds: 1.0 / p + 1.0 / p1 > 1.0 / n, hard: true },
        Gate { condition: "p ≤ 2N", holds: p <= 2.0 * n, hard: false },
    ];
    if !linear_law {
        gates.push(Gate { condition: "2N/p − 1 > 0", holds: 2.0 * n / p - 1.0 > 0.0, hard: false });
    }
    gates.push(Gate { condition: "2/N ≤ 1/p + 1/p₁", holds: 2.0 / n <= 1.0 / p + 1.0 / p1 + 1e-15, hard: false });
    GateReport { gates }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_indices_pass_every_gate() {
        let g = index_gates(2, 2.0, 2.0, false);
        assert!(g.gates.iter().all(|g| g.holds));
    }

    #[test]
    fn p1_above_p_is_rejected() {
        let g = index_gates(2, 2.0, 3.0, false);
        assert_eq!(g.holds("1 ≤ p₁ ≤ p"), Some(false));
        assert!(g.violations()[0].contains("1 ≤ p₁ ≤ p"));
    }

    #[test]
    fn uniqueness_is_a_warning() {
        let g = index_gates(3, 4.0, 3.0, false);
        assert!(g.violations().is_empty());
        assert_eq!(g.holds("2/N ≤ 1/p + 1/p₁"), Some(false));
        assert_eq!(g.warnings().len(), 1);
    }

    #[test]
    fn linear_law_drops_positivity_condition() {
        assert_eq!(index_gates(2, 4.0, 4.0, true).holds("2N/p − 1 > 0"), None);
        assert_eq!(index_gates(2, 4.0, 4.0, false).holds("2N/p − 1 > 0"), Some(false));
    }

    #[test]
    fn validation_lists_every_problem() {
        let grid = Grid::periodic(2, 16).unwrap();
        let mut cfg =
            SolverConfig::new(grid, ViscosityParams::new(0.1, 0.0).unwrap(), PressureLaw::default(), 1.0, 0.1);
        cfg.p1 = 3.0;
        cfg.snapshot_every = 0;
        match cfg.validate().unwrap_err() {
            Error::Validation(list) => assert_eq!(list.len(), 2, "{list:?}"),
            e => panic!("{e}"),
        }
    }
}
