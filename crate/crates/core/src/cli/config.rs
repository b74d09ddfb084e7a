//! Experiment files: TOML with fixed sections, every key optional.
//!
//! ```toml
//! [run]
//! seed = 2024
//!
//! [grid]
//! dim = 2
//! n = 64
//!
//! [physics]
//! mu = 0.1
//! lambda = 0.05
//! k = 1.0
//! gamma = 1.4
//! rho_bar = 1.0
//!
//! [solver]
//! horizon = 0.5
//! dt = 0.005
//!
//! [data]
//! kind = "small"   # small | equilibrium | dip
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::effective::PressureLaw;
use crate::error::{Error, Result};
use crate::lp::{DyadicFilterBank, DEFAULT_ALPHA};
use crate::ns::{small_data, Forcing, InitialData, MonitorConstants, SmallDataSpec, SolverConfig};
use crate::rng::{mix_key, random_smooth_field, SmoothFieldSpec};
use crate::spectral::{Field, Grid, ViscosityParams};
use crate::suites::{Suite, SuiteOptions};

/// Environment variable naming the output root.
pub const OUTPUT_ENV: &str = "BAROTROPIC_OUT";
pub const DEFAULT_OUTPUT: &str = "barotropic-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Verify,
    Simulate,
    Probe,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Verify => "verify",
            Self::Simulate => "simulate",
            Self::Probe => "probe",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    physics: PhysicsSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    monitor: MonitorSection,
    #[serde(default)]
    data: DataSection,
    #[serde(default)]
    verify: VerifySection,
    #[serde(default)]
    probe: ProbeSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunSection {
    seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 2024 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GridSection {
    dim: usize,
    n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dim: 2, n: 64 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PhysicsSection {
    mu: f64,
    lambda: f64,
    k: f64,
    gamma: f64,
    rho_bar: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self { mu: 0.1, lambda: 0.05, k: 1.0, gamma: 1.4, rho_bar: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolverSection {
    horizon: f64,
    dt: f64,
    p: f64,
    p1: Option<f64>,
    smoothing: Option<i32>,
    dealias: bool,
    snapshot_every: usize,
    vacuum_floor: f64,
    alpha: f64,
    a_bound: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            horizon: 0.5,
            dt: 5e-3,
            p: 2.0,
            p1: None,
            smoothing: None,
            dealias: true,
            snapshot_every: 10,
            vacuum_floor: 0.1,
            alpha: DEFAULT_ALPHA,
            a_bound: 10.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MonitorSection {
    c: f64,
    big_c: f64,
    c_prime: f64,
    kappa: f64,
    eta: Option<f64>,
}

impl Default for MonitorSection {
    fn default() -> Self {
        let d = MonitorConstants::default();
        Self { c: d.c, big_c: d.big_c, c_prime: d.c_prime, kappa: d.kappa, eta: d.eta }
    }
}

/// Initial data families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    /// Seeded smooth data rescaled to given critical norms.
    Small,
    Equilibrium,
    /// `rho0 = rho_bar (1 - depth cos x1)`, `u0 = (speed sin x1, 0, ...)`:
    /// a density dip that the velocity empties.
    Dip,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DataSection {
    kind: DataKind,
    a_norm: f64,
    u_norm: f64,
    depth: f64,
    speed: f64,
    /// Amplitude of a seeded steady forcing; zero disables it.
    forcing: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { kind: DataKind::Small, a_norm: 0.01, u_norm: 0.01, depth: 0.8, speed: 2.0, forcing: 0.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct VerifySection {
    fields: usize,
    pairs: usize,
    fine_n: usize,
    gammas: Vec<f64>,
    deltas: Vec<f64>,
}

impl Default for VerifySection {
    fn default() -> Self {
        let d = SuiteOptions::default();
        Self { fields: d.fields, pairs: d.pairs, fine_n: d.fine_n, gammas: d.gammas, deltas: d.deltas }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ProbeSection {
    delta: Option<f64>,
}

/// Description of the initial data, kept to rebuild it and to record it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataSpec {
    pub kind: DataKind,
    pub seed: u64,
    pub a_norm: f64,
    pub u_norm: f64,
    pub depth: f64,
    pub speed: f64,
    pub forcing: f64,
}

impl DataSpec {
    pub fn build(&self, config: &SolverConfig) -> Result<InitialData> {
        let grid = &config.grid;
        let rho_bar = config.law.rho_bar;
        match self.kind {
            DataKind::Equilibrium => Ok(InitialData::equilibrium(grid, rho_bar)),
            DataKind::Small => {
                let bank = DyadicFilterBank::new(grid, config.alpha)?;
                let spec = SmallDataSpec { seed: self.seed, a_norm: self.a_norm, u_norm: self.u_norm };
                let mut data = small_data(config, spec, &bank)?;
                data.rho0 = data.rho0.scale(rho_bar);
                Ok(data)
            }
            DataKind::Dip => {
                let (depth, speed) = (self.depth, self.speed);
                Ok(InitialData {
                    rho0: Field::from_fn(grid, 1, |x, _| rho_bar * (1.0 - depth * x[0].cos())),
                    u0: Field::from_fn(grid, grid.dim(), |x, c| if c == 0 { speed * x[0].sin() } else { 0.0 }),
                })
            }
        }
    }

    fn forcing(&self, grid: &Grid) -> Forcing {
        if self.forcing == 0.0 {
            return Forcing::Zero;
        }
        let shape = SmoothFieldSpec { decay: 4.0, cutoff: Some(4), mean_free: true };
        let f = random_smooth_field(grid, grid.dim(), &shape, mix_key(&[self.seed, 0xF0]));
        let peak = f.max_abs();
        Forcing::Steady(if peak > 0.0 { f.scale(self.forcing / peak) } else { f })
    }
}

/// A parsed and validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub solver: SolverConfig,
    pub data: DataSpec,
    pub options: SuiteOptions,
    pub delta: Option<f64>,
    /// Index conditions that are not met but do not block the run.
    pub warnings: Vec<String>,
    pub output: PathBuf,
}

/// Line and column (1-based) of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

fn parse_error(source: &str, text: &str, err: &toml::de::Error) -> Error {
    let location = match err.span() {
        Some(span) => {
            let (line, col) = line_col(text, span.start);
            let key = text.get(span.clone()).unwrap_or("").trim();
            if key.is_empty() || key.contains('\n') {
                format!("{source}:{line}:{col}")
            } else {
                format!("{source}:{line}:{col} (key `{key}`)")
            }
        }
        None => source.to_string(),
    };
    Error::Parse { location, message: err.message().trim().to_string() }
}

/// Output root: `BAROTROPIC_OUT` when set, else `./barotropic-out`.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUTPUT), PathBuf::from)
}

/// Parses an experiment file for the given mode.
pub fn parse_config(path: &Path, mode: Mode) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, &path.display().to_string(), mode)
}

/// Parses experiment text; `source` names it in error locations.
pub fn parse_config_str(text: &str, source: &str, mode: Mode) -> Result<ExperimentSpec> {
    let file: File = toml::from_str(text).map_err(|e| parse_error(source, text, &e))?;
    build(file, mode)
}

fn build(file: File, mode: Mode) -> Result<ExperimentSpec> {
    let mut problems = Vec::new();
    let grid = match Grid::periodic(file.grid.dim, file.grid.n) {
        Ok(g) => Some(g),
        Err(e) => {
            problems.push(e.to_string());
            None
        }
    };
    let visc = ViscosityParams { mu: file.physics.mu, lambda: file.physics.lambda };
    let law = PressureLaw { k: file.physics.k, gamma: file.physics.gamma, rho_bar: file.physics.rho_bar };
    let s = &file.solver;
    if !(s.alpha > 1.0 && s.alpha < 4.0 / 3.0) {
        problems.push(format!("alpha must lie in (1, 4/3), got {}", s.alpha));
    }
    let d = &file.data;
    if d.kind == DataKind::Dip && !(d.depth >= 0.0 && d.depth < 1.0) {
        problems.push(format!("dip depth must lie in [0, 1), got {}", d.depth));
    }
    if !(d.a_norm >= 0.0 && d.u_norm >= 0.0) {
        problems.push("data norms must be nonnegative".into());
    }
    let v = &file.verify;
    if v.fields == 0 || v.pairs == 0 {
        problems.push("verification ensembles need at least one sample".into());
    }
    if v.gammas.is_empty() || v.gammas.iter().any(|g| !(*g >= 1.0)) {
        problems.push("verification gammas must be nonempty and at least 1".into());
    }
    if v.deltas.len() < 2 || v.deltas.iter().any(|d| !(*d > 0.0)) {
        problems.push("verification deltas need at least two positive values".into());
    }
    if mode == Mode::Probe && file.probe.delta.is_some_and(|d| !(d >= 0.0 && d.is_finite())) {
        problems.push("probe delta must be finite and nonnegative".into());
    }

    let mut warnings = Vec::new();
    let solver = grid.map(|grid| {
        let data = DataSpec {
            kind: d.kind,
            seed: file.run.seed,
            a_norm: d.a_norm,
            u_norm: d.u_norm,
            depth: d.depth,
            speed: d.speed,
            forcing: d.forcing,
        };
        let mut cfg = SolverConfig::new(grid.clone(), visc, law, s.horizon, s.dt);
        cfg.p = s.p;
        cfg.p1 = s.p1.unwrap_or(s.p);
        cfg.smoothing = s.smoothing;
        cfg.dealias = s.dealias;
        cfg.snapshot_every = s.snapshot_every;
        cfg.vacuum_floor = s.vacuum_floor;
        cfg.alpha = s.alpha;
        cfg.a_bound = s.a_bound;
        cfg.forcing = data.forcing(&grid);
        cfg.monitor = MonitorConstants {
            c: file.monitor.c,
            big_c: file.monitor.big_c,
            c_prime: file.monitor.c_prime,
            kappa: file.monitor.kappa,
            eta: file.monitor.eta,
        };
        (cfg, data)
    });
    if let Some((cfg, _)) = &solver {
        match cfg.validate() {
            Ok(gates) => warnings = gates.warnings(),
            Err(Error::Validation(list)) => problems.extend(list),
            Err(e) => problems.push(e.to_string()),
        }
    }
    if !problems.is_empty() {
        problems.dedup();
        return Err(Error::Validation(problems));
    }
    let (solver, data) = solver.expect("grid is valid when there are no problems");
    let options = SuiteOptions {
        seed: file.run.seed,
        fields: v.fields,
        pairs: v.pairs,
        grid_n: file.grid.n,
        fine_n: v.fine_n,
        visc,
        gammas: v.gammas.clone(),
        horizon: s.horizon,
        dt: s.dt,
        small: SmallDataSpec { seed: file.run.seed, a_norm: d.a_norm, u_norm: d.u_norm },
        deltas: v.deltas.clone(),
    };
    Ok(ExperimentSpec {
        mode,
        seed: file.run.seed,
        suites: Suite::ALL.to_vec(),
        solver,
        data,
        options,
        delta: file.probe.delta,
        warnings,
        output: output_root().join(mode.name()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_documented_defaults() {
        let spec = parse_config_str("", "t", Mode::Simulate).unwrap();
        assert_eq!(spec.solver.alpha, 8.0 / 7.0);
        assert_eq!(spec.solver.monitor.c, 0.01);
        assert_eq!(spec.solver.vacuum_floor, 0.1);
        assert_eq!(spec.seed, 2024);
        assert_eq!(spec.options, SuiteOptions::default());
    }

    #[test]
    fn unknown_key_is_located() {
        let err = parse_config_str("[grid]\nn = 32\nfoo = 1\n", "t.toml", Mode::Verify).unwrap_err();
        match err {
            Error::Parse { location, message } => {
                assert_eq!(location, "t.toml:3:1 (key `foo`)");
                assert!(message.contains("foo"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_section_is_rejected() {
        assert!(matches!(parse_config_str("[extra]\n", "t", Mode::Verify), Err(Error::Parse { .. })));
    }

    #[test]
    fn p1_above_p_cites_the_gate() {
        let err = parse_config_str("[solver]\np = 2.0\np1 = 3.0\n", "t", Mode::Simulate).unwrap_err();
        match err {
            Error::Validation(list) => assert!(list.iter().any(|m| m.contains("1 ≤ p₁ ≤ p")), "{list:?}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        let text = "[physics]\nmu = -1.0\n[solver]\ndt = 0.0\np1 = 3.0\n";
        match parse_config_str(text, "t", Mode::Simulate).unwrap_err() {
            Error::Validation(list) => assert!(list.len() >= 3, "{list:?}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn line_and_column() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
