use crate::error::{Error, Result};
use crate::lp::{lr_norm, DyadicFilterBank};
use crate::report::{smallest_constant, Sample};
use crate::series::{cumulative_trapezoid, TimeInput, TimeSeries};
use crate::spectral::{advect, dealias, lame_operator, Field, ViscosityParams};

use super::lame_heat::{step_count, LameSemigroup};
use super::lawson::lawson_heun3;
use super::transport::check_cfl;

/// Truncation `b_m = 1 + S_m a` of the density factor `b = 1 + a`.
#[derive(Clone, Copy)]
pub struct TruncationConfig<'a> {
    pub m: i32,
    /// Lower bound `b_` of `1 + a`; `inf b_m >= b_ / 2` is required throughout.
    pub b_under: f64,
    /// Scalar coefficient `a(t)`.
    pub a: TimeInput<'a>,
}

/// `u_t + v . grad u + u . grad w - (1 + a) A u = f + g`.
#[derive(Clone, Copy)]
pub struct VarcoefProblem<'a> {
    pub u0: &'a Field,
    pub v: TimeInput<'a>,
    pub w: TimeInput<'a>,
    pub f: TimeInput<'a>,
    pub g: TimeInput<'a>,
    pub visc: ViscosityParams,
    pub trunc: TruncationConfig<'a>,
    pub horizon: f64,
    pub dt: f64,
}

impl VarcoefProblem<'_> {
    fn coefficient(&self, t: f64) -> Field {
        self.trunc.a.eval(t).unwrap_or_else(|| Field::zeros(self.u0.grid(), 1))
    }
}

/// `E_m = (A u)(a - S_m a)`, the part of `(1 + a) A u` not carried by `b_m`.
pub fn truncation_error(
    a: &Field,
    u: &Field,
    visc: &ViscosityParams,
    m: i32,
    bank: &DyadicFilterBank,
) -> Result<Field> {
    let high = a - &bank.low_pass(a, m);
    Ok(dealias(&(&high * &lame_operator(u, visc)?)))
}

/// `inf_x (1 + S_m a)`.
pub fn truncated_infimum(a: &Field, m: i32, bank: &DyadicFilterBank) -> f64 {
    1.0 + bank.low_pass(a, m).min()
}

/// Integrating-factor solve: `mean(b_m) A` is propagated exactly per mode;
/// `(b_m - mean b_m) A u`, `E_m`, both transport terms and the sources are
/// explicit. Fails with `TruncationInvalid` when `inf b_m < b_ / 2`.
pub fn solve_varcoef_parabolic(problem: &VarcoefProblem, bank: &DyadicFilterBank) -> Result<TimeSeries> {
    problem.visc.validate()?;
    let b_under = problem.trunc.b_under;
    if !(b_under > 0.0) {
        return Err(Error::InvalidParameter(format!("density lower bound must be positive, got {b_under}")));
    }
    let (steps, h) = step_count(problem.horizon, problem.dt)?;
    let m = problem.trunc.m;
    let visc = problem.visc;
    let check = |t: f64| -> Result<Field> {
        let a = problem.coefficient(t);
        let infimum = truncated_infimum(&a, m, bank);
        if infimum < 0.5 * b_under {
            return Err(Error::TruncationInvalid { time: t, infimum, bound: 0.5 * b_under });
        }
        Ok(a)
    };

    let mut frames = Vec::with_capacity(steps + 1);
    let mut u = problem.u0.clone();
    frames.push(u.clone());
    for i in 0..steps {
        let t = i as f64 * h;
        let a = check(t)?;
        if let Some(v) = problem.v.eval(t) {
            check_cfl(&v, h, t)?;
        }
        let b_eff = 1.0 + bank.low_pass(&a, m).mean(0);
        let semigroup = LameSemigroup::scaled(visc, b_eff);
        let rhs = |tau: f64, u: &Field| -> Result<Field> {
            let a = problem.coefficient(tau);
            let b_m = bank.low_pass(&a, m).map(|x| 1.0 + x - b_eff);
            let au = lame_operator(u, &visc)?;
            let mut out = dealias(&(&b_m * &au));
            out = &out + &truncation_error(&a, u, &visc, m, bank)?;
            if let Some(v) = problem.v.eval(tau) {
                out = &out - &dealias(&advect(&v, u)?);
            }
            if let Some(w) = problem.w.eval(tau) {
                out = &out - &dealias(&advect(u, &w)?);
            }
            for src in [&problem.f, &problem.g] {
                if let Some(s) = src.eval(tau) {
                    out = &out + &s;
                }
            }
            Ok(out)
        };
        u = lawson_heun3(&u, t, h, |a, s, b| a.axpy(s, b), |y, tau| semigroup.propagate(y, tau), rhs)?;
        if !u.is_finite() {
            return Err(Error::NonFinite { time: t + h });
        }
        frames.push(u.clone());
    }
    check(steps as f64 * h)?;
    TimeSeries::new(0.0, h, frames)
}

/// Exponents and constants for checking the variable-coefficient bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarcoefNorms {
    /// Regularity of the solution norm.
    pub s: f64,
    /// Integrability of the coefficients `a`, `v`, `w`.
    pub p: f64,
    /// Integrability of the solution.
    pub p1: f64,
    /// Smoothing constant multiplying the `L~^1` term.
    pub kappa: f64,
    /// Smallness constant of the truncation condition.
    pub c: f64,
}

/// Grönwall-form bound with accumulators `V`, `W`, `Z_m` and the fitted `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarcoefEstimate {
    pub constant: f64,
    /// Largest `kappa` tried that admits a finite constant.
    pub kappa: f64,
    pub v_acc: Vec<f64>,
    pub w_acc: Vec<f64>,
    pub z_acc: Vec<f64>,
    /// `sup_t |a - S_m a|_{B^{N/p}_{p,1}}` and its threshold `c nu_ / nu_bar`.
    pub truncation: (f64, f64),
    /// `inf_{t,x} (1 + S_m a)`.
    pub truncated_infimum: f64,
    /// Sides of the bound at each stored time, at the fitted constant.
    pub samples: Vec<Sample>,
}

fn sample_input(input: &TimeInput, times: &[f64], like: &Field, components: usize) -> Vec<Field> {
    times.iter().map(|&t| input.eval(t).unwrap_or_else(|| Field::zeros(like.grid(), components))).collect()
}

/// Per-time weighted level norms `2^{ls} |D_l u|_p`.
fn weighted_levels(frames: &[Field], s: f64, p: f64, bank: &DyadicFilterBank) -> Vec<Vec<f64>> {
    frames.iter().map(|f| bank.level_norms(f, p).weighted(s)).collect()
}

/// Running `L~^inf` and `L~^1` level sums over prefixes `[0, t_i]`.
fn running_chemin_lerner(levels: &[Vec<f64>], dt: f64, r: f64) -> (Vec<f64>, Vec<f64>) {
    let count = levels.first().map_or(0, Vec::len);
    let mut sup = vec![0.0; count];
    let mut int = vec![0.0; count];
    let mut sups = Vec::with_capacity(levels.len());
    let mut ints = Vec::with_capacity(levels.len());
    for (i, lv) in levels.iter().enumerate() {
        for l in 0..count {
            sup[l] = f64::max(sup[l], lv[l]);
            if i > 0 {
                int[l] += 0.5 * dt * (levels[i - 1][l] + lv[l]);
            }
        }
        sups.push(lr_norm(&sup, r));
        ints.push(lr_norm(&int, r));
    }
    (sups, ints)
}

/// Grönwall right-hand side `e^{CX(t)} (d0 + int e^{-CX} g)` on every prefix.
fn gronwall(c: f64, x: &[f64], d0: f64, g: &[f64], dt: f64) -> Vec<f64> {
    let weighted: Vec<f64> = x.iter().zip(g).map(|(x, g)| (-c * x).exp() * g).collect();
    let integral = cumulative_trapezoid(&weighted, dt);
    x.iter().zip(&integral).map(|(x, i)| (c * x).exp() * (d0 + i)).collect()
}

const KAPPA_HALVINGS: usize = 24;

/// Checks `|u|_{L~inf B^s_{p1,1}} + kappa nu_ |u|_{L~1 B^{s+2}_{p1,1}}
/// <= e^{C(V+W+Z_m)} (|u0| + int e^{-C(V+W+Z_m)} (|f| + |g|))`.
///
/// `kappa` starts at the configured value and is halved until some finite
/// `C` works; the pair found and the smallest such `C` are reported.
pub fn verify_varcoef_estimate(
    run: &TimeSeries,
    problem: &VarcoefProblem,
    bank: &DyadicFilterBank,
    norms: VarcoefNorms,
) -> Result<VarcoefEstimate> {
    let dim = bank.grid().dim();
    let n = dim as f64;
    let times = run.times();
    let dt = run.dt;
    let m = problem.trunc.m;
    let nu_under = problem.visc.nu_under(problem.trunc.b_under);
    let nu_bar = problem.visc.nu_bar();
    let like = run.first();

    let a = sample_input(&problem.trunc.a, &times, like, 1);
    let v = sample_input(&problem.v, &times, like, dim);
    let w = sample_input(&problem.w, &times, like, dim);
    let f = sample_input(&problem.f, &times, like, dim);
    let g = sample_input(&problem.g, &times, like, dim);

    let besov = |x: &Field, s: f64, p: f64| bank.level_norms(x, p).besov(s, 1.0);
    let v_acc = cumulative_trapezoid(&v.iter().map(|x| besov(x, n / norms.p + 1.0, norms.p)).collect::<Vec<_>>(), dt);
    let w_acc = cumulative_trapezoid(&w.iter().map(|x| besov(x, n / norms.p + 1.0, norms.p)).collect::<Vec<_>>(), dt);
    let z_scale = (4f64).powi(m) * nu_bar * nu_bar / nu_under;
    let z_acc: Vec<f64> =
        cumulative_trapezoid(&a.iter().map(|x| besov(x, n / norms.p, norms.p).powi(2)).collect::<Vec<_>>(), dt)
            .iter()
            .map(|z| z_scale * z)
            .collect();
    let x: Vec<f64> = (0..times.len()).map(|i| v_acc[i] + w_acc[i] + z_acc[i]).collect();

    let levels = weighted_levels(&run.frames, norms.s, norms.p1, bank);
    let (sup, _) = running_chemin_lerner(&levels, dt, 1.0);
    let levels2 = weighted_levels(&run.frames, norms.s + 2.0, norms.p1, bank);
    let (_, int) = running_chemin_lerner(&levels2, dt, 1.0);
    let d0 = besov(run.first(), norms.s, norms.p1);
    let src: Vec<f64> =
        f.iter().zip(&g).map(|(f, g)| besov(f, norms.s, norms.p1) + besov(g, norms.s, norms.p1)).collect();

    // Largest kappa on the ladder kappa0 2^-j (then 0) admitting a finite C.
    let fit = |kappa: f64| {
        let lhs: Vec<f64> = sup.iter().zip(&int).map(|(s, i)| s + kappa * nu_under * i).collect();
        let constant = smallest_constant(|c| {
            let rhs = gronwall(c, &x, d0, &src, dt);
            lhs.iter().zip(&rhs).all(|(l, r)| *l <= r * (1.0 + 1e-12))
        });
        (constant, lhs)
    };
    let ladder = (0..KAPPA_HALVINGS).map(|j| norms.kappa * 0.5f64.powi(j as i32)).chain(std::iter::once(0.0));
    let mut best = None;
    for kappa in ladder {
        let (constant, lhs) = fit(kappa);
        if constant.is_finite() {
            best = Some((kappa, constant, lhs));
            break;
        }
    }
    let (kappa, constant, lhs) = best.unwrap_or_else(|| {
        let (constant, lhs) = fit(0.0);
        (0.0, constant, lhs)
    });
    let rhs = gronwall(constant.min(1e12), &x, d0, &src, dt);
    let truncation_value =
        a.iter().map(|x| besov(&(x - &bank.low_pass(x, m)), n / norms.p, norms.p)).fold(0.0, f64::max);
    let truncated_inf = a.iter().map(|x| truncated_infimum(x, m, bank)).fold(f64::INFINITY, f64::min);
    Ok(VarcoefEstimate {
        constant,
        kappa,
        v_acc,
        w_acc,
        z_acc,
        truncation: (truncation_value, norms.c * nu_under / nu_bar),
        truncated_infimum: truncated_inf,
        samples: lhs.iter().zip(&rhs).enumerate().map(|(i, (l, r))| Sample::new(i, *l, *r)).collect(),
    })
}

/// The endpoint regularity `s = -N/p1` bound with `r = inf` norms, checked on
/// the window where `nu_bar^2 t |a|^2_{L~inf_t B^{N/p}_{p,1}} <= c 2^{-2m} nu_`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointEstimate {
    pub constant: f64,
    /// Last stored time inside the smallness window.
    pub window_end: f64,
    pub samples: Vec<Sample>,
}

pub fn verify_varcoef_endpoint(
    run: &TimeSeries,
    problem: &VarcoefProblem,
    bank: &DyadicFilterBank,
    norms: VarcoefNorms,
) -> Result<EndpointEstimate> {
    let dim = bank.grid().dim();
    let n = dim as f64;
    let times = run.times();
    let dt = run.dt;
    let m = problem.trunc.m;
    let nu_under = problem.visc.nu_under(problem.trunc.b_under);
    let nu_bar = problem.visc.nu_bar();
    let like = run.first();
    let s = -n / norms.p1;

    let a = sample_input(&problem.trunc.a, &times, like, 1);
    let v = sample_input(&problem.v, &times, like, dim);
    let w = sample_input(&problem.w, &times, like, dim);
    let f = sample_input(&problem.f, &times, like, dim);

    let coeff = |x: &Field| bank.level_norms(x, norms.p).besov(n / norms.p + 1.0, 1.0);
    let vw: Vec<f64> = v.iter().zip(&w).map(|(v, w)| coeff(v) + coeff(w)).collect();
    let x = cumulative_trapezoid(&vw, dt);

    let a_levels = weighted_levels(&a, n / norms.p, norms.p, bank);
    let (a_sup, _) = running_chemin_lerner(&a_levels, dt, 1.0);
    let in_window: Vec<bool> = times
        .iter()
        .zip(&a_sup)
        .map(|(t, an)| nu_bar * nu_bar * t * an * an <= norms.c * (4f64).powi(-m) * nu_under)
        .collect();
    let window_len = in_window.iter().take_while(|&&b| b).count();

    let u_levels = weighted_levels(&run.frames, s, norms.p1, bank);
    let (u_sup, _) = running_chemin_lerner(&u_levels, dt, f64::INFINITY);
    let u2_levels = weighted_levels(&run.frames, s + 2.0, norms.p1, bank);
    let (_, u_int) = running_chemin_lerner(&u2_levels, dt, f64::INFINITY);
    let f_levels = weighted_levels(&f, s, norms.p1, bank);
    let (_, f_int) = running_chemin_lerner(&f_levels, dt, f64::INFINITY);
    let d0 = lr_norm(&u_levels[0], f64::INFINITY);

    let lhs: Vec<f64> = (0..times.len()).map(|i| u_sup[i] + norms.kappa * nu_under * u_int[i]).collect();
    let rhs = |c: f64, i: usize| 2.0 * (c * x[i]).exp() * (d0 + f_int[i]);
    let constant = smallest_constant(|c| (0..window_len).all(|i| lhs[i] <= rhs(c, i) * (1.0 + 1e-12)));
    let samples = (0..window_len).map(|i| Sample::new(i, lhs[i], rhs(constant.min(1e12), i))).collect();
    Ok(EndpointEstimate {
        constant,
        window_end: if window_len == 0 { f64::NAN } else { times[window_len - 1] },
        samples,
    })
}
