use crate::error::{Error, Result};
use crate::lp::{series_profiles, BesovParams, DyadicFilterBank};
use crate::report::{smallest_constant, Sample};
use crate::series::{cumulative_trapezoid, TimeInput, TimeSeries};
use crate::spectral::{advect, dealias, divergence, Field};

use super::lame_heat::step_count;

/// Largest admissible `dt |v|_inf k_max` for the explicit transport steps.
pub const CFL_LIMIT: f64 = 0.5;

/// `dt * max|v| * (largest axis wavenumber)`.
pub fn cfl_number(v: &Field, dt: f64) -> f64 {
    dt * v.magnitude().max_abs() * v.grid().max_axis_wavenumber()
}

pub(crate) fn check_cfl(v: &Field, dt: f64, time: f64) -> Result<()> {
    let number = cfl_number(v, dt);
    if number > CFL_LIMIT {
        return Err(Error::CflViolation { time, number, limit: CFL_LIMIT });
    }
    Ok(())
}

/// Three-stage strong-stability-preserving Runge-Kutta step.
pub(crate) fn ssp_rk3(u: &Field, t: f64, h: f64, rhs: impl Fn(f64, &Field) -> Result<Field>) -> Result<Field> {
    let u1 = u.axpy(h, &rhs(t, u)?);
    let u2 = u.scale(0.75).axpy(0.25, &u1.axpy(h, &rhs(t + h, &u1)?));
    let u3 = u.scale(1.0 / 3.0).axpy(2.0 / 3.0, &u2.axpy(h, &rhs(t + 0.5 * h, &u2)?));
    Ok(u3)
}

fn require_velocity(v: &TimeInput, t: f64, like: &Field) -> Result<Field> {
    Ok(v.eval(t).unwrap_or_else(|| Field::zeros(like.grid(), like.grid().dim())))
}

/// `a_t + v . grad a = g` by SSP-RK3 with dealiased advection.
pub fn solve_transport(a0: &Field, v: &TimeInput, g: &TimeInput, horizon: f64, dt: f64) -> Result<TimeSeries> {
    let (steps, h) = step_count(horizon, dt)?;
    let rhs = |t: f64, a: &Field| -> Result<Field> {
        let vel = require_velocity(v, t, a)?;
        let mut out = dealias(&advect(&vel, a)?).scale(-1.0);
        if let Some(src) = g.eval(t) {
            out = &out + &src;
        }
        Ok(out)
    };
    integrate(a0, v, steps, h, rhs, |_, _| Ok(()))
}

fn integrate(
    a0: &Field,
    v: &TimeInput,
    steps: usize,
    h: f64,
    rhs: impl Fn(f64, &Field) -> Result<Field>,
    check: impl Fn(f64, &Field) -> Result<()>,
) -> Result<TimeSeries> {
    let mut frames = Vec::with_capacity(steps + 1);
    let mut a = a0.clone();
    check(0.0, &a)?;
    frames.push(a.clone());
    for i in 0..steps {
        let t = i as f64 * h;
        if let Some(vel) = v.eval(t) {
            check_cfl(&vel, h, t)?;
        }
        a = ssp_rk3(&a, t, h, &rhs)?;
        if !a.is_finite() {
            return Err(Error::NonFinite { time: t + h });
        }
        check(t + h, &a)?;
        frames.push(a.clone());
    }
    TimeSeries::new(0.0, h, frames)
}

/// Mass equation in the `a = 1/rho - 1` variable:
/// `a_t + v . grad a = (1 + a) div v`.
///
/// Fails with `VacuumApproach` once `inf(1 + a)` drops below `floor`.
pub fn solve_mass_equation(a0: &Field, v: &TimeInput, horizon: f64, dt: f64, floor: f64) -> Result<TimeSeries> {
    let (steps, h) = step_count(horizon, dt)?;
    let rhs = |t: f64, a: &Field| -> Result<Field> {
        let vel = require_velocity(v, t, a)?;
        let div = divergence(&vel)?;
        let growth = &div + &(a * &div);
        Ok(dealias(&(&growth - &advect(&vel, a)?)))
    };
    let check = |t: f64, a: &Field| -> Result<()> {
        let minimum = 1.0 + a.min();
        if minimum < floor {
            return Err(Error::VacuumApproach { time: t, minimum, floor });
        }
        Ok(())
    };
    integrate(a0, v, steps, h, rhs, check)
}

/// Per-time `sup_{tau <= t}` of each level norm, weighted by `2^{ls}`.
fn running_level_sup(profiles: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(profiles.len());
    let mut acc = vec![0.0; profiles.first().map_or(0, Vec::len)];
    for prof in profiles {
        for (i, (a, v)) in acc.iter_mut().zip(prof).enumerate() {
            *a = f64::max(*a, (2f64).powf((i as f64 - 1.0) * s) * v);
        }
        out.push(acc.clone());
    }
    out
}

fn running_max(values: &[f64]) -> Vec<f64> {
    let mut m = 0.0f64;
    values
        .iter()
        .map(|v| {
            m = m.max(*v);
            m
        })
        .collect()
}

fn lr(values: &[f64], r: f64) -> f64 {
    crate::lp::lr_norm(values, r)
}

/// Fitted constants of the transport bound
/// `|a|_{L~inf_t B} <= e^{CU(t)} (|a0|_B + int e^{-CU} |g|_B)`,
/// `U(t) = int |grad v|_{B^{N/p1}_{p1,inf} cap L^inf}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportEstimate {
    pub constant: f64,
    pub accumulator: Vec<f64>,
    pub samples: Vec<Sample>,
}

pub fn verify_transport_estimate(
    a: &TimeSeries,
    v: &TimeSeries,
    g: Option<&TimeSeries>,
    params: BesovParams,
    p1: f64,
    bank: &DyadicFilterBank,
) -> Result<TransportEstimate> {
    params.validate()?;
    let n = bank.grid().dim() as f64;
    let dt = a.dt;
    let lhs = chemin_lerner_running(a, params, bank)?;
    let grad_norms: Vec<f64> = v
        .frames
        .iter()
        .map(|vf| {
            let jac = crate::paradiff::jacobian(vf);
            let prof = bank.level_norms(&jac, p1);
            prof.besov(n / p1, f64::INFINITY) + jac.max_abs()
        })
        .collect();
    let u_acc = cumulative_trapezoid(&grad_norms, dt);
    let a0 = bank.level_norms(a.first(), params.p).besov(params.s, params.r);
    let g_norms: Vec<f64> = match g {
        Some(g) => g.frames.iter().map(|f| bank.level_norms(f, p1).besov(params.s, params.r)).collect(),
        None => vec![0.0; a.len()],
    };
    let rhs_at = |c: f64, i: usize| -> f64 {
        let weighted: Vec<f64> = (0..=i).map(|j| (-c * u_acc[j]).exp() * g_norms[j]).collect();
        let forcing = cumulative_trapezoid(&weighted, dt)[i];
        (c * u_acc[i]).exp() * (a0 + forcing)
    };
    let constant = smallest_constant(|c| (0..a.len()).all(|i| lhs[i] <= rhs_at(c, i) * (1.0 + 1e-12)));
    let samples = (0..a.len()).map(|i| Sample::new(i, lhs[i], rhs_at(constant.min(1e12), i))).collect();
    Ok(TransportEstimate { constant, accumulator: u_acc, samples })
}

/// `|a|_{L~inf_t B^s_{p,r}}` for every prefix `[0, t_i]`.
fn chemin_lerner_running(a: &TimeSeries, params: BesovParams, bank: &DyadicFilterBank) -> Result<Vec<f64>> {
    let profiles: Vec<Vec<f64>> = series_profiles(a, params.p, bank)?.into_iter().map(|p| p.norms).collect();
    Ok(running_level_sup(&profiles, params.s).iter().map(|w| lr(w, params.r)).collect())
}

/// Fitted constants of the three mass-equation bounds: growth of
/// `|a|_{B cap L^inf}`, the high-frequency tail `|a - S_m a|_B`, and the
/// low-frequency drift of `a - a0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassEstimate {
    pub growth_constant: f64,
    pub tail_constant: f64,
    pub drift_constant: f64,
    /// `V(t) = int |grad v|_{B^{N/p1}_{p1,1}}`.
    pub accumulator: Vec<f64>,
    /// Low-frequency drift norm at each stored time.
    pub drift: Vec<f64>,
    /// Growth bound sides at the fitted constant.
    pub growth: Vec<Sample>,
}

pub fn verify_mass_estimates(
    a: &TimeSeries,
    v: &TimeSeries,
    bank: &DyadicFilterBank,
    m: i32,
    params: BesovParams,
    p1: f64,
) -> Result<MassEstimate> {
    params.validate()?;
    if a.len() != v.len() {
        return Err(Error::InvalidParameter(format!(
            "density and velocity series differ in length: {} vs {}",
            a.len(),
            v.len()
        )));
    }
    let n = bank.grid().dim() as f64;
    let dt = a.dt;
    let (s, r) = (params.s, params.r);
    let profiles: Vec<Vec<f64>> = series_profiles(a, params.p, bank)?.into_iter().map(|p| p.norms).collect();
    let running = running_level_sup(&profiles, s);
    let sup_inf = running_max(&a.frames.iter().map(Field::max_abs).collect::<Vec<_>>());

    let mut grad_norms = Vec::with_capacity(v.len());
    let mut v_norms = Vec::with_capacity(v.len());
    for vf in &v.frames {
        let jac = crate::paradiff::jacobian(vf);
        grad_norms.push(bank.level_norms(&jac, p1).besov(n / p1, 1.0));
        v_norms.push(bank.level_norms(vf, p1).besov(n / p1, 1.0));
    }
    let big_v = cumulative_trapezoid(&grad_norms, dt);
    let v_int = cumulative_trapezoid(&v_norms, dt);

    let a0_b = lr(&running[0], r);
    let a0_full = a0_b + a.first().max_abs();

    // Growth: |a|_{L~inf(B) cap L^inf} <= e^{2CV}|a0| + e^{2CV} - 1.
    let growth_lhs: Vec<f64> = (0..a.len()).map(|i| lr(&running[i], r) + sup_inf[i]).collect();
    let growth_rhs = |c: f64, i: usize| (2.0 * c * big_v[i]).exp() * (1.0 + a0_full) - 1.0;
    let growth_constant =
        smallest_constant(|c| (0..a.len()).all(|i| growth_lhs[i] <= growth_rhs(c, i) + 1e-12 * (1.0 + a0_full)));

    // Tail: levels m and above of the current snapshot.
    let tail = |prof: &[f64]| -> f64 {
        let w: Vec<f64> = prof
            .iter()
            .enumerate()
            .map(|(i, v)| if i as i32 > m { (2f64).powf((i as f64 - 1.0) * s) * v } else { 0.0 })
            .collect();
        lr(&w, r)
    };
    let tail0 = tail(&profiles[0]);
    let tail_lhs: Vec<f64> = profiles.iter().map(|p| tail(p)).collect();
    let tail_rhs =
        |c: f64, i: usize| tail0 + 0.5 * (1.0 + a0_full) * (2.0 * c * big_v[i]).exp_m1() + c * sup_inf[i] * big_v[i];
    let tail_constant = smallest_constant(|c| (0..a.len()).all(|i| tail_lhs[i] <= tail_rhs(c, i) + 1e-12));

    // Drift: levels at most m of sup_t |D_l (a - a0)|_p.
    let diff = a.map(|f| f - a.first());
    let diff_profiles: Vec<Vec<f64>> = series_profiles(&diff, params.p, bank)?.into_iter().map(|p| p.norms).collect();
    let diff_running = running_level_sup(&diff_profiles, s);
    let drift: Vec<f64> = diff_running
        .iter()
        .map(|w| {
            let low: Vec<f64> = w.iter().enumerate().filter(|(i, _)| *i as i32 - 1 <= m).map(|(_, v)| *v).collect();
            lr(&low, r)
        })
        .collect();
    let drift_rhs = |c: f64, i: usize| (1.0 + a0_b) * (c * big_v[i]).exp_m1() + c * (2f64).powi(m) * a0_b * v_int[i];
    let drift_constant = smallest_constant(|c| (0..a.len()).all(|i| drift[i] <= drift_rhs(c, i) + 1e-12));

    let growth =
        (0..a.len()).map(|i| Sample::new(i, growth_lhs[i], growth_rhs(growth_constant.min(1e12), i))).collect();
    Ok(MassEstimate { growth_constant, tail_constant, drift_constant, accumulator: big_v, drift, growth })
}

/// Exact mass-equation solution for `v = (eps sin x, 0)` and `a0 = 0`:
/// `1 + a = cosh(eps t) + sinh(eps t) cos x`.
pub fn compressive_shear_solution(x: f64, t: f64, eps: f64) -> f64 {
    (eps * t).cosh() - 1.0 + (eps * t).sinh() * x.cos()
}

/// Velocity of the exact mass-equation solution above.
pub fn compressive_shear_velocity(grid: &crate::spectral::Grid, eps: f64) -> Field {
    Field::from_fn(grid, grid.dim(), |x, c| if c == 0 { eps * x[0].sin() } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn zero_velocity_keeps_data() {
        let g = Grid::periodic(2, 16).unwrap();
        let a0 = Field::from_fn(&g, 1, |x, _| x[0].sin() + (2.0 * x[1]).cos());
        let sol = solve_transport(&a0, &TimeInput::Zero, &TimeInput::Zero, 0.3, 0.05).unwrap();
        assert!(sol.last().max_abs_diff(&a0) < 1e-15);
    }

    #[test]
    fn constant_velocity_translates() {
        let g = Grid::periodic(2, 32).unwrap();
        let a0 = Field::from_fn(&g, 1, |x, _| x[0].sin() + 0.5 * (2.0 * x[1]).cos());
        let c = [0.7, -0.4];
        let v = Field::from_fn(&g, 2, |_, j| c[j]);
        let horizon = 0.5;
        let sol = solve_transport(&a0, &TimeInput::Steady(&v), &TimeInput::Zero, horizon, 2e-3).unwrap();
        let exact =
            Field::from_fn(&g, 1, |x, _| (x[0] - c[0] * horizon).sin() + 0.5 * (2.0 * (x[1] - c[1] * horizon)).cos());
        assert!(sol.last().max_abs_diff(&exact) < 1e-8);
    }

    #[test]
    fn manufactured_decay_is_recovered() {
        let g = Grid::periodic(2, 32).unwrap();
        let a0 = Field::from_fn(&g, 1, |x, _| x[0].cos() * x[1].sin());
        let v = Field::from_fn(&g, 2, |x, j| if j == 0 { 0.3 * x[1].cos() } else { 0.2 * x[0].sin() });
        let adv = advect(&v, &a0).unwrap();
        let source = |t: f64| (&adv - &a0).scale((-t).exp());
        let sol = solve_transport(&a0, &TimeInput::Steady(&v), &TimeInput::Function(&source), 0.5, 1e-2).unwrap();
        let exact = a0.scale((-0.5f64).exp());
        assert!(sol.last().max_abs_diff(&exact) < 1e-6);
    }

    #[test]
    fn cfl_is_enforced() {
        let g = Grid::periodic(2, 32).unwrap();
        let v = Field::constant(&g, 2, 10.0);
        let a0 = Field::zeros(&g, 1);
        let err = solve_transport(&a0, &TimeInput::Steady(&v), &TimeInput::Zero, 1.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn mass_equation_matches_characteristics() {
        let g = Grid::periodic(2, 32).unwrap();
        let eps = 0.4;
        let v = compressive_shear_velocity(&g, eps);
        let a0 = Field::zeros(&g, 1);
        let horizon = 1.0;
        let sol = solve_mass_equation(&a0, &TimeInput::Steady(&v), horizon, 5e-3, 0.1).unwrap();
        let exact = Field::from_fn(&g, 1, |x, _| compressive_shear_solution(x[0], horizon, eps));
        assert!(sol.last().max_abs_diff(&exact) < 1e-8, "{}", sol.last().max_abs_diff(&exact));
    }

    #[test]
    fn divergence_free_mass_equation_is_transport() {
        let g = Grid::periodic(2, 32).unwrap();
        let v = Field::from_fn(&g, 2, |x, j| if j == 0 { x[1].sin() } else { x[0].cos() });
        let a0 = Field::from_fn(&g, 1, |x, _| 0.1 * (x[0] + x[1]).sin());
        let vt = TimeInput::Steady(&v);
        let mass = solve_mass_equation(&a0, &vt, 0.4, 0.01, 0.1).unwrap();
        let tr = solve_transport(&a0, &vt, &TimeInput::Zero, 0.4, 0.01).unwrap();
        assert!(mass.last().max_abs_diff(tr.last()) < 1e-10);
    }

    #[test]
    fn vacuum_floor_aborts() {
        let g = Grid::periodic(2, 32).unwrap();
        let v = compressive_shear_velocity(&g, -3.0);
        let a0 = Field::zeros(&g, 1);
        let err = solve_mass_equation(&a0, &TimeInput::Steady(&v), 2.0, 0.01, 0.5).unwrap_err();
        assert!(matches!(err, Error::VacuumApproach { .. }));
    }

    #[test]
    fn zero_velocity_growth_is_trivial() {
        let g = Grid::periodic(2, 32).unwrap();
        let bank = DyadicFilterBank::with_default_alpha(&g).unwrap();
        let a0 = Field::from_fn(&g, 1, |x, _| 0.1 * x[0].sin());
        let a = solve_mass_equation(&a0, &TimeInput::Zero, 0.2, 0.05, 0.1).unwrap();
        let v = a.map(|_| Field::zeros(&g, 2));
        let est = verify_mass_estimates(&a, &v, &bank, 2, BesovParams::new(1.0, 2.0, 1.0).unwrap(), 2.0).unwrap();
        assert_eq!(est.growth_constant, 0.0);
        assert!(est.accumulator.iter().all(|&x| x == 0.0));
        assert!((est.growth[0].lhs - est.growth[0].rhs).abs() < 1e-15);
    }
}
