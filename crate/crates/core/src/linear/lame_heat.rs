use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lp::{series_profiles, DyadicFilterBank};
use crate::report::Sample;
use crate::series::{time_norm, TimeSeries};
use crate::spectral::ops::map_spectrum;
use crate::spectral::{Field, ViscosityParams};

/// `(e^z - 1) / z`.
pub fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z) / z^2`, by series near zero where the direct form cancels.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let mut term = 0.5;
        let mut sum = 0.5;
        for n in 3..12 {
            term *= z / n as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Functions of the operator `s * A` for a scalar `s > 0`, applied mode by
/// mode through the split into longitudinal (`-s nu |k|^2`) and transverse
/// (`-s mu |k|^2`) eigenvalues.
#[derive(Debug, Clone, Copy)]
pub struct LameSemigroup {
    pub visc: ViscosityParams,
    /// Uniform coefficient in front of the operator.
    pub scale: f64,
}

impl LameSemigroup {
    pub fn new(visc: ViscosityParams) -> Self {
        Self { visc, scale: 1.0 }
    }

    pub fn scaled(visc: ViscosityParams, scale: f64) -> Self {
        Self { visc, scale }
    }

    /// `g(s A) u`: `g(transverse eigenvalue)` on `k`-perpendicular parts and
    /// `g(longitudinal eigenvalue)` along `k`.
    pub fn apply(&self, u: &Field, g: impl Fn(f64) -> f64) -> Result<Field> {
        let dim = u.grid().dim();
        if u.components() != dim {
            return Err(Error::ComponentMismatch { expected: dim, got: u.components() });
        }
        let mu = self.scale * self.visc.mu;
        let nu = self.scale * self.visc.nu();
        let g0 = g(0.0);
        Ok(map_spectrum(u, dim, |_, kd, inp, out| {
            let k2: f64 = kd[..dim].iter().map(|k| k * k).sum();
            if k2 == 0.0 {
                for j in 0..dim {
                    out[j] = g0 * inp[j];
                }
                return;
            }
            let gt = g(-mu * k2);
            let gl = g(-nu * k2);
            let kdotu: Complex64 = (0..dim).map(|j| kd[j] * inp[j]).sum();
            let along = (gl - gt) / k2;
            for j in 0..dim {
                out[j] = gt * inp[j] + along * kd[j] * kdotu;
            }
        }))
    }

    /// `e^{t s A} u`.
    pub fn propagate(&self, u: &Field, t: f64) -> Result<Field> {
        self.apply(u, |lam| (t * lam).exp())
    }

    /// One exponential step of `u' = s A u + f(t)` over `h`, exact when `f`
    /// is linear between `f0` (start) and `f1` (end).
    pub fn step(&self, u: &Field, h: f64, f0: Option<&Field>, f1: Option<&Field>) -> Result<Field> {
        let mut next = self.propagate(u, h)?;
        if let Some(f0) = f0 {
            let a = self.apply(f0, |lam| h * phi1(h * lam))?;
            next = &next + &a;
            if let Some(f1) = f1 {
                let df = f1 - f0;
                let b = self.apply(&df, |lam| h * phi2(h * lam))?;
                next = &next + &b;
            }
        }
        Ok(next)
    }
}

/// Number of uniform steps covering `horizon` with steps no longer than `dt`,
/// and the adjusted step.
pub fn step_count(horizon: f64, dt: f64) -> Result<(usize, f64)> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let n = ((horizon / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((n, horizon / n as f64))
}

/// Data of the constant-coefficient system `u' = A u + f`, `u(0) = u0`.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub u0: Field,
    /// Forcing, linearly interpolated between its samples.
    pub forcing: Option<TimeSeries>,
    pub visc: ViscosityParams,
    pub horizon: f64,
    pub dt: f64,
}

impl LinearProblem {
    pub fn new(u0: Field, visc: ViscosityParams, horizon: f64, dt: f64) -> Self {
        Self { u0, forcing: None, visc, horizon, dt }
    }

    pub fn with_forcing(mut self, forcing: TimeSeries) -> Self {
        self.forcing = Some(forcing);
        self
    }

    fn forcing_at(&self, t: f64) -> Option<Field> {
        self.forcing.as_ref().map(|f| f.at(t))
    }
}

/// Exponential integration of the constant-coefficient Lamé system; each
/// step is exact for forcing linear in time, so forcing sampled on the step
/// times is integrated without time-discretization error.
pub fn solve_lame_heat(problem: &LinearProblem) -> Result<TimeSeries> {
    problem.visc.validate()?;
    let (steps, h) = step_count(problem.horizon, problem.dt)?;
    let semigroup = LameSemigroup::new(problem.visc);
    let mut frames = Vec::with_capacity(steps + 1);
    let mut u = problem.u0.clone();
    frames.push(u.clone());
    let mut f_prev = problem.forcing_at(0.0);
    for i in 0..steps {
        let t1 = (i + 1) as f64 * h;
        let f_next = problem.forcing_at(t1);
        u = semigroup.step(&u, h, f_prev.as_ref(), f_next.as_ref())?;
        frames.push(u.clone());
        f_prev = f_next;
    }
    TimeSeries::new(0.0, h, frames)
}

/// Both sides of the two constant-coefficient bounds, with the largest
/// admissible `kappa` found level by level.
#[derive(Debug, Clone, PartialEq)]
pub struct LameHeatEstimate {
    /// `sum_l 2^{ls} sup_t |D_l u|_p` against `|u0|_B + int |f|_B`.
    pub sup_bound: Sample,
    /// Largest `kappa` for which every level obeys the saturating bound.
    pub kappa: f64,
    /// Per-level largest `kappa`, index `l + 1`; `inf` on empty levels.
    pub level_kappa: Vec<f64>,
    /// Summed saturating bound evaluated at the fitted `kappa`.
    pub smoothing: Sample,
}

/// Largest `y` with `(1 - e^-y) / y >= q` for `q` in `(0, 1)`.
fn saturation_root(q: f64) -> f64 {
    let g = |y: f64| -(-y).exp_m1() / y;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi) > q {
        hi *= 2.0;
        if hi > 1e15 {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) >= q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Evaluates both bounds on a computed solution with `nu = min(mu, lambda + 2 mu)`.
pub fn verify_lame_heat_estimate(
    problem: &LinearProblem,
    solution: &TimeSeries,
    bank: &DyadicFilterBank,
    s: f64,
    p: f64,
) -> Result<LameHeatEstimate> {
    let nu = problem.visc.min_eigen();
    let horizon = solution.final_time() - solution.t0;
    let dt = solution.dt;
    let levels = bank.level_count();
    let u_profiles = series_profiles(solution, p, bank)?;
    let u0 = bank.level_norms(&problem.u0, p).norms;
    let f_l1: Vec<f64> = match &problem.forcing {
        Some(f) => {
            let frames: Vec<Field> = solution.times().iter().map(|&t| f.at(t)).collect();
            let fs = TimeSeries::new(solution.t0, dt, frames)?;
            let prof = series_profiles(&fs, p, bank)?;
            (0..levels).map(|i| time_norm(&prof.iter().map(|pr| pr.norms[i]).collect::<Vec<_>>(), dt, 1.0)).collect()
        }
        None => vec![0.0; levels],
    };
    let per_level = |i: usize| -> Vec<f64> { u_profiles.iter().map(|pr| pr.norms[i]).collect() };
    let weight = |i: usize, sh: f64| (2f64).powf((i as f64 - 1.0) * sh);

    // Levels carrying only roundoff would yield meaningless rates.
    let negligible = 1e-10 * (0..levels).map(|i| u0[i] + f_l1[i]).fold(0.0, f64::max);
    let mut sup_lhs = 0.0;
    let mut data = 0.0;
    let mut level_kappa = Vec::with_capacity(levels);
    let mut l1 = Vec::with_capacity(levels);
    for i in 0..levels {
        let series = per_level(i);
        sup_lhs += weight(i, s) * time_norm(&series, dt, f64::INFINITY);
        let d = u0[i] + f_l1[i];
        data += weight(i, s) * d;
        let integral = time_norm(&series, dt, 1.0);
        l1.push(integral);
        let x = (4f64).powi(i as i32 - 1);
        let kappa = if integral <= 0.0 || d <= negligible {
            f64::INFINITY
        } else if d <= 0.0 || horizon <= 0.0 {
            0.0
        } else {
            let q = integral / (horizon * d);
            if q >= 1.0 {
                0.0
            } else {
                saturation_root(q) / (nu * x * horizon)
            }
        };
        level_kappa.push(kappa);
    }
    let kappa = level_kappa.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    if kappa.is_finite() {
        for i in 0..levels {
            let x = (4f64).powi(i as i32 - 1);
            lhs += kappa * nu * weight(i, s + 2.0) * l1[i];
            rhs += weight(i, s) * -(-kappa * nu * x * horizon).exp_m1() * (u0[i] + f_l1[i]);
        }
    }
    Ok(LameHeatEstimate {
        sup_bound: Sample::new(0, sup_lhs, data),
        kappa,
        level_kappa,
        smoothing: Sample::new(1, lhs, rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Ensemble;
    use crate::spectral::{lame_operator, Grid};

    fn visc() -> ViscosityParams {
        ViscosityParams::new(0.1, 0.05).unwrap()
    }

    #[test]
    fn phi_functions_match_direct_forms() {
        for &z in &[-3.0f64, -0.5, -0.09, -1e-3, 0.0, 1e-6, 0.05] {
            let direct2 = if z == 0.0 { 0.5 } else { (z.exp() - 1.0 - z) / (z * z) };
            let direct1 = if z == 0.0 { 1.0 } else { (z.exp() - 1.0) / z };
            assert!((phi1(z) - direct1).abs() < 1e-9);
            if z.abs() > 1e-3 {
                assert!((phi2(z) - direct2).abs() < 1e-9, "{z}");
            }
        }
        assert!((phi2(1e-8) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn single_modes_decay_at_their_eigenvalues() {
        let g = Grid::periodic(2, 16).unwrap();
        let v = visc();
        // Transverse: (sin(2y), 0) has k = (0, 2) perpendicular to the field.
        let trans = Field::from_fn(&g, 2, |x, c| if c == 0 { (2.0 * x[1]).sin() } else { 0.0 });
        // Longitudinal: gradient of sin(3x).
        let long = Field::from_fn(&g, 2, |x, c| if c == 0 { (3.0 * x[0]).cos() } else { 0.0 });
        let t = 0.7;
        let sg = LameSemigroup::new(v);
        let a = sg.propagate(&trans, t).unwrap();
        let b = sg.propagate(&long, t).unwrap();
        let da = (-v.mu * 4.0 * t).exp();
        let db = (-v.nu() * 9.0 * t).exp();
        assert!(a.max_abs_diff(&trans.scale(da)) < 1e-14);
        assert!(b.max_abs_diff(&long.scale(db)) < 1e-14);
    }

    #[test]
    fn matches_small_step_rk4_with_forcing() {
        let g = Grid::periodic(2, 16).unwrap();
        let v = visc();
        let ens = Ensemble::new(11, 1);
        let u0 = ens.field(&g, 0, 0, 2);
        let fa = ens.field(&g, 0, 1, 2);
        let fb = ens.field(&g, 0, 2, 2);
        let horizon = 0.2;
        let dt = 0.01;
        let steps = 20;
        let forcing_fn = |t: f64| fa.axpy(t, &fb);
        let frames: Vec<Field> = (0..=steps).map(|i| forcing_fn(i as f64 * dt)).collect();
        let problem =
            LinearProblem::new(u0.clone(), v, horizon, dt).with_forcing(TimeSeries::new(0.0, dt, frames).unwrap());
        let sol = solve_lame_heat(&problem).unwrap();

        let rhs = |t: f64, u: &Field| &lame_operator(u, &v).unwrap() + &forcing_fn(t);
        let mut u = u0;
        let h = 1e-4;
        let mut t = 0.0;
        for _ in 0..2000 {
            let k1 = rhs(t, &u);
            let k2 = rhs(t + 0.5 * h, &u.axpy(0.5 * h, &k1));
            let k3 = rhs(t + 0.5 * h, &u.axpy(0.5 * h, &k2));
            let k4 = rhs(t + h, &u.axpy(h, &k3));
            let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(2.0);
            u = u.axpy(h / 6.0, &incr);
            t += h;
        }
        let err = u.max_abs_diff(sol.last()) / u.max_abs();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn fitted_kappa_matches_a_single_mode() {
        let g = Grid::periodic(2, 64).unwrap();
        let v = visc();
        let bank = DyadicFilterBank::with_default_alpha(&g).unwrap();
        let k = 5.0;
        let u0 = Field::from_fn(&g, 2, |x, c| if c == 0 { (k * x[1]).sin() } else { 0.0 });
        let problem = LinearProblem::new(u0, v, 1.0, 0.01);
        let sol = solve_lame_heat(&problem).unwrap();
        let est = verify_lame_heat_estimate(&problem, &sol, &bank, 0.0, 2.0).unwrap();
        assert!(est.sup_bound.ratio <= 1.0 + 1e-12);
        // Transverse rate mu k^2 over nu 4^l, for the level(s) holding the mode.
        let nu = v.min_eigen();
        let expect: Vec<f64> = (0..bank.level_count())
            .filter(|&i| est.level_kappa[i].is_finite())
            .map(|i| v.mu * k * k / (nu * (4f64).powi(i as i32 - 1)))
            .collect();
        let analytic = expect.iter().cloned().fold(f64::INFINITY, f64::min);
        let rel = est.kappa / analytic;
        assert!((0.1..=10.0).contains(&rel), "{} vs {}", est.kappa, analytic);
        assert!((rel - 1.0).abs() < 0.05, "{rel}");
        assert!(est.smoothing.ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = Grid::periodic(2, 16).unwrap();
        let bank = DyadicFilterBank::with_default_alpha(&g).unwrap();
        let problem = LinearProblem::new(Field::zeros(&g, 2), visc(), 0.5, 0.1);
        let sol = solve_lame_heat(&problem).unwrap();
        assert_eq!(sol.last().max_abs(), 0.0);
        let est = verify_lame_heat_estimate(&problem, &sol, &bank, 0.0, 2.0).unwrap();
        assert_eq!(est.sup_bound.lhs, 0.0);
        assert_eq!(est.sup_bound.rhs, 0.0);
    }
}
