//! The numerical acceptance checks, grouped into named suites. The command
//! line front end and the integration tests run the same code.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::effective::{FluidState, Formulation, PressureLaw};
use crate::error::{Error, Result};
use crate::linear::{
    solve_lame_heat, solve_mass_equation, solve_transport, verify_lame_heat_estimate, verify_mass_estimates,
    LinearProblem,
};
use crate::lp::{equivalence_constant, verify_bernstein, verify_norm_equivalence, BesovParams, DyadicFilterBank};
use crate::ns::{
    continuation_monitor, divergence_slope, energy_diagnostic, run, small_data, twin_run_probe, InitialData, RunOutput,
    SmallDataSpec, SolverConfig,
};
use crate::paradiff::{
    bony_decomposition, lame_commutator, transport_commutator, verify_commutator, CommutatorEstimate,
};
use crate::report::drift_factor;
use crate::rng::{Ensemble, SmoothFieldSpec};
use crate::series::{TimeInput, TimeSeries};
use crate::spectral::{dealiased_product, lame_operator, Field, Grid, ViscosityParams};

/// Named groups of checks, in acceptance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Reconstruction,
    Bernstein,
    Bony,
    Commutator,
    LameHeat,
    Transport,
    Decoupling,
    Nonlinear,
    Probe,
    Energy,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Reconstruction,
        Suite::Bernstein,
        Suite::Bony,
        Suite::Commutator,
        Suite::LameHeat,
        Suite::Transport,
        Suite::Decoupling,
        Suite::Nonlinear,
        Suite::Probe,
        Suite::Energy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Reconstruction => "reconstruction",
            Suite::Bernstein => "bernstein",
            Suite::Bony => "bony",
            Suite::Commutator => "commutator",
            Suite::LameHeat => "lame-heat",
            Suite::Transport => "transport",
            Suite::Decoupling => "decoupling",
            Suite::Nonlinear => "nonlinear",
            Suite::Probe => "probe",
            Suite::Energy => "energy",
        }
    }

    /// Acceptance criterion number, 1 to 10.
    pub fn number(self) -> usize {
        Suite::ALL.iter().position(|&s| s == self).expect("listed") + 1
    }

    pub fn title(self) -> &'static str {
        match self {
            Suite::Reconstruction => "Littlewood-Paley reconstruction and quasi-orthogonality",
            Suite::Bernstein => "Bernstein ratios and norm equivalence",
            Suite::Bony => "Bony decomposition identity",
            Suite::Commutator => "commutator estimates",
            Suite::LameHeat => "Lame heat solver",
            Suite::Transport => "transport and mass estimates",
            Suite::Decoupling => "effective velocity decoupling",
            Suite::Nonlinear => "nonlinear small-data run",
            Suite::Probe => "continuous dependence probe",
            Suite::Energy => "energy diagnostic",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// Parses `all` or a comma-separated list of suite names.
pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
    if s.trim() == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    s.split(',').map(|x| x.trim().parse()).collect()
}

/// Sizes and physical parameters shared by the suites.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Fields in the reconstruction ensemble.
    pub fields: usize,
    /// Pairs in the product and commutator ensembles.
    pub pairs: usize,
    pub grid_n: usize,
    /// Finer grid of the resolution-uniformity checks.
    pub fine_n: usize,
    pub visc: ViscosityParams,
    pub gammas: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub small: SmallDataSpec,
    pub deltas: Vec<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            fields: 100,
            pairs: 50,
            grid_n: 64,
            fine_n: 256,
            visc: ViscosityParams { mu: 0.1, lambda: 0.05 },
            gammas: vec![1.0, 1.4],
            horizon: 0.5,
            dt: 5e-3,
            small: SmallDataSpec::default(),
            deltas: vec![1e-3, 1e-4, 1e-5],
        }
    }
}

/// One measured value against its acceptance bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable bound, e.g. `< 1e-10`.
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, bound: format!("< {limit:e}"), passed: value < limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, bound: format!(">= {limit}"), passed: value >= limit }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, bound: format!("in [{lo}, {hi}]"), passed: value >= lo && value <= hi }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: "= 1".into(), passed: ok }
    }
}

/// A fitted constant and the grids it was measured on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRow {
    pub inequality: String,
    pub constant: f64,
    pub grids: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub constants: Vec<ConstantRow>,
    pub seconds: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `criterion <n> <name>: PASS|FAIL (<failed checks>)`.
    pub fn summary_line(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {} {}: {verdict}", self.suite.number(), self.suite.name());
        if !failed.is_empty() {
            let _ = write!(line, " ({})", failed.join(", "));
        }
        line
    }
}

pub fn checks_csv(results: &[SuiteResult]) -> String {
    let mut out = String::from("criterion,suite,check,value,bound,passed\n");
    for r in results {
        for c in &r.checks {
            let _ = writeln!(
                out,
                "{},{},{},{:.10e},{},{}",
                r.suite.number(),
                r.suite.name(),
                c.name,
                c.value,
                c.bound,
                c.passed
            );
        }
    }
    out
}

pub fn constants_csv(results: &[SuiteResult]) -> String {
    let mut out = String::from("inequality,constant,grids,seed\n");
    for r in results {
        for c in &r.constants {
            let grids: Vec<String> = c.grids.iter().map(|g| g.to_string()).collect();
            let _ = writeln!(out, "{},{:.10e},{},{}", c.inequality, c.constant, grids.join(" "), c.seed);
        }
    }
    out
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteResult> {
    let start = std::time::Instant::now();
    let mut constants = Vec::new();
    let checks = match suite {
        Suite::Reconstruction => reconstruction(opts)?,
        Suite::Bernstein => bernstein(opts, &mut constants)?,
        Suite::Bony => bony(opts)?,
        Suite::Commutator => commutator(opts, &mut constants)?,
        Suite::LameHeat => lame_heat(opts, &mut constants)?,
        Suite::Transport => transport(opts, &mut constants)?,
        Suite::Decoupling => decoupling(opts)?,
        Suite::Nonlinear => nonlinear(opts)?,
        Suite::Probe => probe(opts, &mut constants)?,
        Suite::Energy => energy(opts)?,
    };
    Ok(SuiteResult { suite, checks, constants, seconds: start.elapsed().as_secs_f64() })
}

fn grid(n: usize) -> Result<Grid> {
    Grid::periodic(2, n)
}

fn reconstruction(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let g = grid(opts.grid_n)?;
    let bank = DyadicFilterBank::with_default_alpha(&g)?;
    let ens = Ensemble::new(opts.seed, opts.fields);
    let mut recon = 0.0f64;
    let mut ortho = 0.0f64;
    for i in 0..opts.fields {
        let u = ens.field(&g, i, 0, 1);
        let u = u.scale(1.0 / u.max_abs());
        let blocks = bank.blocks(&u);
        let sum = blocks.iter().skip(1).fold(blocks[0].clone(), |acc, b| &acc + b);
        recon = recon.max(sum.max_abs_diff(&u));
        for (l, b) in blocks.iter().enumerate() {
            for m in l + 2..blocks.len() {
                let lm = bank.block(b, m as i32 - 1);
                ortho = ortho.max(lm.max_abs());
            }
        }
    }
    Ok(vec![
        Check::below("reconstruction relative error", recon, 1e-10),
        Check::below("quasi-orthogonality", ortho, 1e-12),
    ])
}

fn bernstein(opts: &SuiteOptions, constants: &mut Vec<ConstantRow>) -> Result<Vec<Check>> {
    let g = grid(opts.grid_n)?;
    let bank = DyadicFilterBank::with_default_alpha(&g)?;
    let ens = Ensemble::new(opts.seed, opts.pairs);
    // The band [1/alpha, 2 alpha] is sharp in L^2 only; in L^inf the lower
    // bound holds up to a constant, which is recorded instead.
    let mut all_within = true;
    let mut worst_dev = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut lo_inf = f64::INFINITY;
    for i in 0..opts.pairs {
        let u = ens.field(&g, i, 0, 1);
        let rep = verify_bernstein(&u, &bank, 2.0)?;
        all_within &= rep.within(0.01);
        for r in &rep.rows {
            lo = lo.min(r.ratio);
            hi = hi.max(r.ratio);
            worst_dev = worst_dev.max((rep.lower / r.ratio - 1.0).max(r.ratio / rep.upper - 1.0));
        }
        let rep = verify_bernstein(&u, &bank, f64::INFINITY)?;
        lo_inf = rep.rows.iter().fold(lo_inf, |m, r| m.min(r.ratio));
    }
    constants.push(ConstantRow {
        inequality: "bernstein-lower-linf".into(),
        constant: 1.0 / lo_inf,
        grids: vec![opts.grid_n],
        seed: opts.seed,
    });
    let params = BesovParams::new(1.0, 2.0, 1.0)?;
    let mut fitted = Vec::new();
    for n in [opts.grid_n, opts.fine_n] {
        let rep = verify_norm_equivalence(&ens, &grid(n)?, params)?;
        fitted.push(equivalence_constant(&rep));
    }
    constants.push(ConstantRow {
        inequality: "norm-equivalence".into(),
        constant: fitted[0].max(fitted[1]),
        grids: vec![opts.grid_n, opts.fine_n],
        seed: opts.seed,
    });
    Ok(vec![
        Check::flag("L2 Bernstein ratios within [1/alpha, 2 alpha] up to 1%", all_within),
        Check::below("Bernstein worst excess over the band", worst_dev, 0.01),
        Check::within("smallest Bernstein ratio", lo, 1.0 / crate::lp::DEFAULT_ALPHA * 0.99, f64::INFINITY),
        Check::within("largest Bernstein ratio", hi, 0.0, 2.0 * crate::lp::DEFAULT_ALPHA * 1.01),
        Check::below("norm-equivalence constant drift across grids", drift_factor(fitted[0], fitted[1]), 2.0),
    ])
}

fn bony(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let g = grid(opts.grid_n)?;
    let bank = DyadicFilterBank::with_default_alpha(&g)?;
    let ens = Ensemble::new(opts.seed, opts.pairs);
    let mut worst = 0.0f64;
    for i in 0..opts.pairs {
        let u = ens.field(&g, i, 0, 1);
        let v = ens.field(&g, i, 1, 1);
        let parts = bony_decomposition(&u, &v, &bank)?;
        let uv = dealiased_product(&u, &v);
        worst = worst.max(parts.sum().max_abs_diff(&uv) / uv.max_abs().max(f64::MIN_POSITIVE));
    }
    Ok(vec![Check::below("paraproduct identity relative error", worst, 1e-10)])
}

fn commutator_estimates() -> [CommutatorEstimate; 3] {
    [
        CommutatorEstimate::Transport { p: 2.0, p1: 2.0, sigma: 0.5 },
        CommutatorEstimate::SelfTransport { p: 2.0, p1: 2.0, sigma: 1.0 },
        CommutatorEstimate::Lame { p: 2.0, p1: 2.0, alpha: 1.0, sigma: 0.5, axis: 0 },
    ]
}

fn commutator(opts: &SuiteOptions, constants: &mut Vec<ConstantRow>) -> Result<Vec<Check>> {
    let g = grid(opts.grid_n)?;
    let bank = DyadicFilterBank::with_default_alpha(&g)?;
    let ens = Ensemble::new(opts.seed, opts.pairs);
    let mut checks = Vec::new();

    // Constant coefficients commute with every block.
    let mut worst = 0.0f64;
    for i in 0..opts.pairs.min(10) {
        let a = ens.field(&g, i, 1, 1);
        let w = ens.field(&g, i, 2, 2);
        let v = Field::constant(&g, 2, 0.3 + 0.1 * i as f64);
        let c = Field::constant(&g, 1, 1.5);
        for q in bank.levels() {
            worst = worst.max(transport_commutator(&v, &a, q, &bank)?.max_abs());
            worst = worst.max(lame_commutator(&c, &w, 0, q, &bank)?.max_abs());
            worst = worst.max(lame_commutator(&c, &w, 1, q, &bank)?.max_abs());
        }
    }
    checks.push(Check::below("constant-coefficient commutators", worst, 1e-12));

    for est in commutator_estimates() {
        let coarse = verify_commutator(&est, &ens, &g)?;
        let fine = verify_commutator(&est, &ens, &grid(opts.fine_n)?)?;
        constants.push(ConstantRow {
            inequality: est.id().into(),
            constant: coarse.max_ratio.max(fine.max_ratio),
            grids: vec![opts.grid_n, opts.fine_n],
            seed: opts.seed,
        });
        checks.push(Check::below(
            format!("{} constant drift across grids", est.id()),
            drift_factor(coarse.max_ratio, fine.max_ratio),
            2.0,
        ));
    }
    Ok(checks)
}

fn lame_heat(opts: &SuiteOptions, constants: &mut Vec<ConstantRow>) -> Result<Vec<Check>> {
    let g = grid(opts.grid_n)?;
    let visc = opts.visc;
    let t = 0.5;

    // Transverse (sin 3y, 0) and longitudinal (cos 4x, 0) modes.
    let trans = Field::from_fn(&g, 2, |x, c| if c == 0 { (3.0 * x[1]).sin() } else { 0.0 });
    let long = Field::from_fn(&g, 2, |x, c| if c == 0 { (4.0 * x[0]).cos() } else { 0.0 });
    let solve = |u0: &Field| solve_lame_heat(&LinearProblem::new(u0.clone(), visc, t, 0.05));
    let et = solve(&trans)?.last().max_abs_diff(&trans.scale((-visc.mu * 9.0 * t).exp()));
    let el = solve(&long)?.last().max_abs_diff(&long.scale((-visc.nu() * 16.0 * t).exp()));

    // Saturating bound on a random field.
    let bank = DyadicFilterBank::with_default_alpha(&g)?;
    let ens = Ensemble::new(opts.seed, 1);
    let u0 = ens.field(&g, 0, 0, 2);
    let problem = LinearProblem::new(u0.clone(), visc, 1.0, 0.01);
    let sol = solve_lame_heat(&problem)?;
    let est = verify_lame_heat_estimate(&problem, &sol, &bank, 0.0, 2.0)?;
    constants.push(ConstantRow {
        inequality: "lame-heat-smoothing-kappa".into(),
        constant: est.kappa,
        grids: vec![opts.grid_n],
        seed: opts.seed,
    });

    // Fine-step classical Runge-Kutta oracle with forcing.
    let small = grid(16)?;
    let u0 = ens.field(&small, 0, 0, 2);
    let fa = ens.field(&small, 0, 1, 2);
    let fb = ens.field(&small, 0, 2, 2);
    let (horizon, dt) = (0.2, 0.01);
    let steps = (horizon / dt) as usize;
    let forcing = |t: f64| fa.axpy(t, &fb);
    let frames: Vec<Field> = (0..=steps).map(|i| forcing(i as f64 * dt)).collect();
    let problem = LinearProblem::new(u0.clone(), visc, horizon, dt).with_forcing(TimeSeries::new(0.0, dt, frames)?);
    let sol = solve_lame_heat(&problem)?;
    let rhs = |t: f64, u: &Field| -> Result<Field> { Ok(&lame_operator(u, &visc)? + &forcing(t)) };
    let (mut u, mut tt, h) = (u0, 0.0, 1e-4);
    for _ in 0..(horizon / h).round() as usize {
        let k1 = rhs(tt, &u)?;
        let k2 = rhs(tt + 0.5 * h, &u.axpy(0.5 * h, &k1))?;
        let k3 = rhs(tt + 0.5 * h, &u.axpy(0.5 * h, &k2))?;
        let k4 = rhs(tt + h, &u.axpy(h, &k3))?;
        u = u.axpy(h / 6.0, &(&(&k1 + &k4) + &(&k2 + &k3).scale(2.0)));
        tt += h;
    }
    let oracle = u.max_abs_diff(sol.last()) / u.max_abs();

    Ok(vec![
        Check::below("transverse mode decay", et, 1e-10),
        Check::below("longitudinal mode decay", el, 1e-10),
        Check::below("sup bound ratio minus one", est.sup_bound.ratio - 1.0, 1e-12),
        Check::within("fitted kappa", est.kappa, 0.05, 20.0),
        Check::below("explicit oracle relative error", oracle, 1e-6),
    ])
}

fn transport(opts: &SuiteOptions, constants: &mut Vec<ConstantRow>) -> Result<Vec<Check>> {
    let g = grid(opts.grid_n)?;
    let bank = DyadicFilterBank::with_default_alpha(&g)?;

    // Translation by a constant velocity.
    let a0 = Field::from_fn(&g, 1, |x, _| x[0].sin() + 0.5 * (2.0 * x[1]).cos());
    let c = [0.7, -0.4];
    let v = Field::from_fn(&g, 2, |_, j| c[j]);
    let horizon = 0.5;
    let sol = solve_transport(&a0, &TimeInput::Steady(&v), &TimeInput::Zero, horizon, 2e-3)?;
    let exact =
        Field::from_fn(&g, 1, |x, _| (x[0] - c[0] * horizon).sin() + 0.5 * (2.0 * (x[1] - c[1] * horizon)).cos());
    let translation = sol.last().max_abs_diff(&exact);

    // Mass equation driven by a smooth compressive velocity.
    let shape = SmoothFieldSpec { decay: 4.0, cutoff: Some(6), mean_free: true };
    let ens = Ensemble::new(opts.seed, 1).with_shape(shape);
    let vel = ens.field(&g, 0, 0, 2);
    let vel = vel.scale(0.5 / vel.max_abs());
    let a0 = ens.field(&g, 0, 1, 1);
    let a0 = a0.scale(0.2 / a0.max_abs());
    let params = BesovParams::new(1.0, 2.0, 1.0)?;
    let mass = |horizon: f64, dt: f64| -> Result<crate::linear::MassEstimate> {
        let a = solve_mass_equation(&a0, &TimeInput::Steady(&vel), horizon, dt, 0.1)?;
        let vs = a.map(|_| vel.clone());
        verify_mass_estimates(&a, &vs, &bank, 2, params, 2.0)
    };
    let coarse = mass(0.5, 1e-2)?;
    let fine = mass(0.5, 5e-3)?;
    constants.push(ConstantRow {
        inequality: "mass-growth".into(),
        constant: coarse.growth_constant,
        grids: vec![opts.grid_n],
        seed: opts.seed,
    });

    // Low-frequency drift at three horizons.
    let mut pts = Vec::new();
    for horizon in [0.04, 0.02, 0.01] {
        let est = mass(horizon, horizon / 20.0)?;
        pts.push((horizon, *est.drift.last().expect("non-empty")));
    }
    let slope = log_slope(&pts);

    Ok(vec![
        Check::below("constant-velocity translation", translation, 1e-8),
        Check::below(
            "growth constant drift under dt halving",
            drift_factor(coarse.growth_constant, fine.growth_constant),
            1.1,
        ),
        Check::within("low-frequency drift order in T", slope, 0.9, 1.1),
    ])
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn decoupling(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let g = grid(opts.grid_n)?;
    let ens = Ensemble::new(opts.seed, opts.pairs);
    let (mut lap, mut lame, mut form) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &gamma) in opts.gammas.iter().enumerate() {
        let law = PressureLaw::new(1.0, gamma, 1.0)?;
        for i in 0..opts.pairs {
            let d = ens.field(&g, i, 10 + k as u64, 1).mean_free();
            let rho = d.scale(0.3 / d.max_abs()).map(|x| 1.0 + x);
            let u = ens.field(&g, i, 20 + k as u64, 2).scale(0.1);
            let state = FluidState::new(rho, u, opts.visc, law)?;
            let (a, b) = state.decoupling_residuals()?;
            lap = lap.max(a);
            lame = lame.max(b);
            let orig = state.momentum_residual(Formulation::Original, None)?;
            let eff = state.reconstructed_velocity_rate(None)?;
            form = form.max(orig.max_abs_diff(&eff) / orig.max_abs());
        }
    }
    Ok(vec![
        Check::below("potential Laplacian identity", lap, 1e-10),
        Check::below("potential Lame identity", lame, 1e-10),
        Check::below("formulation agreement", form, 1e-9),
    ])
}

/// Small-data configuration of the nonlinear checks.
pub fn small_data_config(opts: &SuiteOptions, gamma: f64) -> Result<SolverConfig> {
    let law = PressureLaw::new(1.0, gamma, 1.0)?;
    Ok(SolverConfig::new(grid(opts.grid_n)?, opts.visc, law, opts.horizon, opts.dt))
}

fn small_data_run(opts: &SuiteOptions, gamma: f64, dt: f64) -> Result<(SolverConfig, InitialData, RunOutput)> {
    let mut cfg = small_data_config(opts, gamma)?;
    cfg.dt = dt;
    let bank = DyadicFilterBank::new(&cfg.grid, cfg.alpha)?;
    let data = small_data(&cfg, opts.small, &bank)?;
    let out = run(&cfg, &data)?;
    Ok((cfg, data, out))
}

/// Largest difference of the per-step norms of two runs at shared times;
/// `fine` must take an integer multiple of the steps of `coarse`.
pub fn trajectory_difference(coarse: &RunOutput, fine: &RunOutput) -> f64 {
    let ratio = fine.steps / coarse.steps;
    coarse
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let s = &fine.records[i * ratio];
            (r.a_norm - s.a_norm).abs() + (r.u_norm - s.u_norm).abs() + (r.v1_norm - s.v1_norm).abs()
        })
        .fold(0.0, f64::max)
}

fn nonlinear(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &gamma in &opts.gammas {
        let tag = format!("gamma={gamma}");
        let (cfg, _, out) = small_data_run(opts, gamma, opts.dt)?;
        checks.push(Check::flag(format!("{tag} run completes"), out.completed()));
        checks.push(Check::below(format!("{tag} mass drift"), out.mass_drift(), 1e-8));
        checks.push(Check::flag(format!("{tag} hypotheses green"), out.monitor.all_green()));
        let floor = out.monitor.truncated_floor();
        checks.push(Check::flag(format!("{tag} truncated density floor"), floor.holds()));
        checks.push(Check::flag(format!("{tag} continuable"), continuation_monitor(&out, &cfg).continuable));

        let (_, _, half) = small_data_run(opts, gamma, opts.dt / 2.0)?;
        let (_, _, quarter) = small_data_run(opts, gamma, opts.dt / 4.0)?;
        let e1 = trajectory_difference(&out, &half);
        let e2 = trajectory_difference(&half, &quarter);
        checks.push(Check::below(format!("{tag} halved-step norm difference"), e1, 1e-4));
        checks.push(Check::at_least(format!("{tag} self-convergence order"), (e1 / e2).log2(), 0.9));

        let equilibrium = InitialData::equilibrium(&cfg.grid, cfg.law.rho_bar);
        let eq = run(&cfg, &equilibrium)?;
        let dev = eq.final_state.rho.max_abs_diff(&equilibrium.rho0) + eq.final_state.u.max_abs();
        checks.push(Check::below(format!("{tag} equilibrium deviation"), dev, 1e-12));
    }
    Ok(checks)
}

fn probe(opts: &SuiteOptions, constants: &mut Vec<ConstantRow>) -> Result<Vec<Check>> {
    let gamma = opts.gammas.first().copied().unwrap_or(1.0);
    let cfg = small_data_config(opts, gamma)?;
    let bank = DyadicFilterBank::new(&cfg.grid, cfg.alpha)?;
    let data = small_data(&cfg, opts.small, &bank)?;
    let reports: Vec<_> = opts.deltas.iter().map(|&d| twin_run_probe(&cfg, &data, d)).collect::<Result<_>>()?;
    let slope = divergence_slope(&reports);
    let zero = twin_run_probe(&cfg, &data, 0.0)?;
    let mut half = cfg.clone();
    half.dt /= 2.0;
    let mid = opts.deltas[opts.deltas.len() / 2];
    let rate = reports[opts.deltas.len() / 2].growth_rate;
    let rate_half = twin_run_probe(&half, &data, mid)?.growth_rate;
    constants.push(ConstantRow {
        inequality: "twin-run-growth-rate".into(),
        constant: rate,
        grids: vec![opts.grid_n],
        seed: opts.seed,
    });
    Ok(vec![
        Check::within("divergence slope in delta", slope, 0.85, 1.15),
        Check::flag("zero perturbation gives zero divergence", zero.divergence().iter().all(|&d| d == 0.0)),
        Check::below("growth rate change under dt halving", (rate - rate_half).abs(), 0.1 * rate.abs().max(0.1)),
    ])
}

fn energy(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let (cfg, _, out) = small_data_run(opts, 1.0, opts.dt)?;
    let rep = energy_diagnostic(&out, &cfg)?;
    Ok(vec![
        Check::below("budget relative increase", rep.max_budget_increase, 1e-6),
        Check::flag("energy inequality", rep.inequality_holds),
    ])
}
