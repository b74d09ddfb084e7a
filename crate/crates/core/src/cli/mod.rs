//! Batch front end: experiment files, the three run modes and their reports.
//!
//! Exit status is 0 when every asserted check passed, 1 when one failed or
//! the run stopped early, and 2 for usage and configuration errors.

mod config;
mod experiment;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{
    output_root, parse_config, parse_config_str, DataKind, DataSpec, ExperimentSpec, Mode, DEFAULT_OUTPUT, OUTPUT_ENV,
};
pub use experiment::{run_experiment, Outcome};
pub use report::{emit_report, suite_report, suite_summary, Manifest, Report, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

use crate::suites::parse_selection;

#[derive(Debug, Parser)]
#[command(
    name = "barotropic",
    version,
    about = "Littlewood-Paley checks and compressible Navier-Stokes runs on the torus"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites (`all` or a comma-separated list of names).
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the nonlinear solver with the hypothesis monitor.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a trajectory and its perturbation of size `delta` side by side.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        delta: f64,
    },
}

impl Command {
    fn mode(&self) -> Mode {
        match self {
            Self::Verify { .. } => Mode::Verify,
            Self::Simulate { .. } => Mode::Simulate,
            Self::Probe { .. } => Mode::Probe,
        }
    }
}

fn spec_for(command: &Command) -> crate::Result<ExperimentSpec> {
    match command {
        Command::Verify { suite, config } => {
            let mut spec = parse_config(config, Mode::Verify)?;
            spec.suites = parse_selection(suite)?;
            Ok(spec)
        }
        Command::Simulate { config } => parse_config(config, Mode::Simulate),
        Command::Probe { config, delta } => {
            let mut spec = parse_config(config, Mode::Probe)?;
            if !(delta.is_finite() && *delta >= 0.0) {
                return Err(crate::Error::Validation(vec![format!(
                    "probe delta must be finite and nonnegative, got {delta}"
                )]));
            }
            spec.delta = Some(*delta);
            Ok(spec)
        }
    }
}

/// Runs the command line and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let mode = cli.command.mode();
    let dir = output_root().join(mode.name());
    let spec = match spec_for(&cli.command) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            let mut manifest = Manifest::usage_error(mode.name(), e.to_string());
            if let Err(io) = emit_report(&Report::default(), &mut manifest, &dir) {
                eprintln!("error: could not write the failure manifest: {io}");
            }
            return EXIT_USAGE;
        }
    };
    for w in &spec.warnings {
        eprintln!("warning: {w}");
    }
    let mut outcome = run_experiment(&spec);
    for line in &outcome.console {
        println!("{line}");
    }
    if let Err(e) = emit_report(&outcome.report, &mut outcome.manifest, &spec.output) {
        eprintln!("error: {e}");
        return EXIT_FAIL;
    }
    let m = &outcome.manifest;
    if let Some(e) = &m.error {
        eprintln!("error: {e}");
    }
    let failed = m.failed();
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join("; "));
    }
    println!("{}: {} (seed {}), reports in {}", m.mode, m.status, spec.seed, spec.output.display());
    m.exit_code
}
