use crate::error::{Error, Result};
use crate::linear::{solve_lame_heat, LinearProblem};
use crate::lp::DyadicFilterBank;
use crate::rng::{Ensemble, SmoothFieldSpec};
use crate::series::TimeSeries;
use crate::spectral::{grad_inv_laplacian, Field, Grid, ViscosityParams};

use super::config::{Forcing, SolverConfig};

/// Initial density and velocity.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub rho0: Field,
    pub u0: Field,
}

impl InitialData {
    pub fn equilibrium(grid: &Grid, rho_bar: f64) -> Self {
        Self { rho0: Field::constant(grid, 1, rho_bar), u0: Field::zeros(grid, grid.dim()) }
    }

    /// Builds the data from `a0 = 1/rho0 - 1`.
    pub fn from_a(a0: &Field, u0: Field) -> Result<Self> {
        if a0.min() <= -1.0 {
            return Err(Error::InvalidParameter("1 + a0 must stay positive".into()));
        }
        Ok(Self { rho0: a0.map(|a| 1.0 / (1.0 + a)), u0 })
    }

    pub fn a0(&self) -> Field {
        self.rho0.map(|r| 1.0 / r - 1.0)
    }
}

/// Norm targets of the random small-data family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallDataSpec {
    pub seed: u64,
    /// `|a0|_{B^{N/p}_{p,1}}`.
    pub a_norm: f64,
    /// `|u0|_{B^{N/p1-1}_{p1,1}}`.
    pub u_norm: f64,
}

impl Default for SmallDataSpec {
    fn default() -> Self {
        Self { seed: 2024, a_norm: 0.01, u_norm: 0.01 }
    }
}

/// Random smooth mean-free data rescaled to the requested critical norms.
pub fn small_data(config: &SolverConfig, spec: SmallDataSpec, bank: &DyadicFilterBank) -> Result<InitialData> {
    let grid = &config.grid;
    let n = grid.dim() as f64;
    let shape = SmoothFieldSpec { decay: 4.0, cutoff: Some(grid.dealias_limit().min(8)), mean_free: true };
    let ens = Ensemble::new(spec.seed, 1).with_shape(shape);
    let normalize = |f: Field, s: f64, p: f64, target: f64| {
        let norm = bank.level_norms(&f, p).besov(s, 1.0);
        if norm == 0.0 || target == 0.0 {
            f.scale(0.0)
        } else {
            f.scale(target / norm)
        }
    };
    let a0 = normalize(ens.field(grid, 0, 0, 1), n / config.p, config.p, spec.a_norm);
    let u0 = normalize(ens.field(grid, 0, 1, grid.dim()), n / config.p1 - 1.0, config.p1, spec.u_norm);
    InitialData::from_a(&a0, u0)
}

/// `(S_n a0, S_n u0, S_n f)`.
pub fn smooth_data(
    a0: &Field,
    u0: &Field,
    f: Option<&Field>,
    n: i32,
    bank: &DyadicFilterBank,
) -> (Field, Field, Option<Field>) {
    (bank.low_pass(a0, n), bank.low_pass(u0, n), f.map(|f| bank.low_pass(f, n)))
}

/// Smallest `m` in `-1..=L_max + 1` with
/// `2 nu_bar sum_{l >= m} 2^{l N/p} |Delta_l a0|_p <= c nu_`, where
/// `nu_ = (1 + inf a0) min(mu, lambda + 2 mu)`.
pub fn choose_m(a0: &Field, c: f64, p: f64, visc: &ViscosityParams, bank: &DyadicFilterBank) -> i32 {
    let n = a0.grid().dim() as f64;
    let weighted = bank.level_norms(a0, p).weighted(n / p);
    let nu_under = visc.nu_under(1.0 + a0.min());
    let bound = c * nu_under;
    let mut tail = 0.0;
    let mut m = bank.max_level() + 1;
    for (i, w) in weighted.iter().enumerate().rev() {
        tail += w;
        if 2.0 * visc.nu_bar() * tail > bound {
            break;
        }
        m = i as i32 - 1;
    }
    m
}

/// Solution of the Lamé heat system from `u0 - v(rho0)/nu` with the run's forcing.
pub fn linear_reference(config: &SolverConfig, data: &InitialData) -> Result<TimeSeries> {
    let v0 = grad_inv_laplacian(&config.law.pressure(&data.rho0)?)?;
    let start = data.u0.axpy(-1.0 / config.visc.nu(), &v0);
    let mut problem = LinearProblem::new(start, config.visc, config.horizon, config.dt);
    if let Forcing::Steady(f) = &config.forcing {
        problem = problem.with_forcing(TimeSeries::new(0.0, config.horizon, vec![f.clone(), f.clone()])?);
    }
    solve_lame_heat(&problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::PressureLaw;
    use crate::lp::besov_value;
    use crate::lp::BesovParams;

    fn config(n: usize) -> (SolverConfig, DyadicFilterBank) {
        let grid = Grid::periodic(2, n).unwrap();
        let bank = DyadicFilterBank::with_default_alpha(&grid).unwrap();
        let cfg = SolverConfig::new(grid, ViscosityParams::new(0.1, 0.05).unwrap(), PressureLaw::default(), 0.1, 0.01);
        (cfg, bank)
    }

    #[test]
    fn small_data_hits_its_norms() {
        let (cfg, bank) = config(32);
        let d = small_data(&cfg, SmallDataSpec::default(), &bank).unwrap();
        let a = besov_value(&d.a0(), BesovParams::new(1.0, 2.0, 1.0).unwrap(), &bank).unwrap();
        let u = besov_value(&d.u0, BesovParams::new(0.0, 2.0, 1.0).unwrap(), &bank).unwrap();
        assert!((a - 0.01).abs() < 1e-12 && (u - 0.01).abs() < 1e-12);
    }

    #[test]
    fn smoothing_limits() {
        let (cfg, bank) = config(32);
        let d = small_data(&cfg, SmallDataSpec::default(), &bank).unwrap();
        let a0 = d.a0();
        let (a, u, _) = smooth_data(&a0, &d.u0, None, bank.max_level() + 2, &bank);
        assert!(a.max_abs_diff(&a0) < 1e-15 && u.max_abs_diff(&d.u0) < 1e-15);
        let (a, _, _) = smooth_data(&a0, &d.u0, None, 0, &bank);
        assert!(a.max_abs_diff(&bank.block(&a0, -1)) < 1e-16);
        for n in 0..=bank.max_level() {
            let (s, _, _) = smooth_data(&a0, &d.u0, None, n, &bank);
            let before = bank.level_norms(&a0, 2.0).norms;
            let after = bank.level_norms(&s, 2.0).norms;
            for (x, y) in after.iter().zip(&before) {
                assert!(*x <= y * (1.0 + 1e-12) + 1e-300);
            }
        }
    }

    #[test]
    fn truncation_level_selection() {
        let (cfg, bank) = config(32);
        let zero = Field::zeros(&cfg.grid, 1);
        assert_eq!(choose_m(&zero, 0.01, 2.0, &cfg.visc, &bank), -1);
        // A single mode at |k| = 8 lies in one band; c below its weight forces m past it.
        let a0 = Field::from_fn(&cfg.grid, 1, |x, _| 0.01 * (8.0 * x[0]).cos());
        let prof = bank.level_norms(&a0, 2.0).weighted(1.0);
        let top = prof.iter().rposition(|&w| w > 1e-14).unwrap() as i32 - 1;
        assert_eq!(choose_m(&a0, 1e-6, 2.0, &cfg.visc, &bank), top + 1);
        assert!(choose_m(&a0, 1e6, 2.0, &cfg.visc, &bank) <= top);
        let mut last = i32::MAX;
        for c in [1e-6, 1e-4, 1e-2, 1.0, 100.0] {
            let m = choose_m(&a0, c, 2.0, &cfg.visc, &bank);
            assert!(m <= last);
            last = m;
        }
    }

    #[test]
    fn linear_reference_vanishes_for_potential_velocity() {
        let (cfg, bank) = config(16);
        let d = small_data(&cfg, SmallDataSpec::default(), &bank).unwrap();
        let v0 = grad_inv_laplacian(&cfg.law.pressure(&d.rho0).unwrap()).unwrap();
        let data = InitialData { rho0: d.rho0.clone(), u0: v0.scale(1.0 / cfg.visc.nu()) };
        let ul = linear_reference(&cfg, &data).unwrap();
        assert!(ul.frames.iter().all(|f| f.max_abs() < 1e-15));
    }
}
