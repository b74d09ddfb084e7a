use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::suites::{checks_csv, constants_csv, Check, SuiteResult};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Machine-readable outcome of one experiment, written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub mode: String,
    /// `pass`, `fail` or `usage-error`.
    pub status: String,
    pub exit_code: i32,
    pub seed: Option<u64>,
    /// Checks that decide the exit status.
    pub assertions: Vec<Check>,
    /// Measured values reported without a verdict on the exit status.
    pub logged: Vec<Check>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    /// Report files written next to the manifest.
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(mode: &str, seed: Option<u64>) -> Self {
        Self {
            mode: mode.into(),
            status: String::new(),
            exit_code: EXIT_PASS,
            seed,
            assertions: Vec::new(),
            logged: Vec::new(),
            warnings: Vec::new(),
            error: None,
            files: Vec::new(),
        }
    }

    pub fn usage_error(mode: &str, message: String) -> Self {
        let mut m = Self::new(mode, None);
        m.status = "usage-error".into();
        m.exit_code = EXIT_USAGE;
        m.error = Some(message);
        m
    }

    /// Sets the status from the assertions and the error: exit 0 only when
    /// there is no error and every assertion passed.
    pub fn finish(&mut self) {
        let ok = self.error.is_none() && self.assertions.iter().all(|c| c.passed);
        self.status = if ok { "pass" } else { "fail" }.into();
        self.exit_code = if ok { EXIT_PASS } else { EXIT_FAIL };
    }

    pub fn failed(&self) -> Vec<&str> {
        self.assertions.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Files of one experiment, keyed by relative path, plus the manifest.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Report {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }
}

/// Writes the report files and `manifest.json` under `dir`. Output depends
/// only on the inputs: no timestamps, no timings, sorted file order.
pub fn emit_report(report: &Report, manifest: &mut Manifest, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    manifest.files = report.files.keys().cloned().collect();
    let mut written = Vec::with_capacity(report.files.len() + 1);
    for (name, bytes) in &report.files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        written.push(path);
    }
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    json.push('\n');
    std::fs::write(&path, json)?;
    written.push(path);
    Ok(written)
}

/// Per-criterion verdicts and the fitted constants with their seeds.
pub fn suite_summary(results: &[SuiteResult]) -> String {
    let mut out = String::new();
    for r in results {
        let _ = writeln!(out, "{}", r.summary_line());
    }
    let rows: Vec<_> = results.iter().flat_map(|r| &r.constants).collect();
    if !rows.is_empty() {
        out.push_str("\nfitted constants\n");
        for c in rows {
            let grids: Vec<String> = c.grids.iter().map(|g| g.to_string()).collect();
            let _ =
                writeln!(out, "  {} = {:.6e} (grids {}, seed {})", c.inequality, c.constant, grids.join("/"), c.seed);
        }
    }
    out
}

/// `checks.csv`, `constants.csv` and `summary.txt` of a verification run.
pub fn suite_report(results: &[SuiteResult]) -> Report {
    let mut report = Report::default();
    report.add("checks.csv", checks_csv(results));
    report.add("constants.csv", constants_csv(results));
    report.add("summary.txt", suite_summary(results));
    report
}
