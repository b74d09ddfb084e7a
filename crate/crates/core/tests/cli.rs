use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn barotropic(out: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_barotropic"))
        .args(args)
        .env("BAROTROPIC_OUT", out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn manifest(out: &Path, mode: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join(mode).join("manifest.json")).unwrap()).unwrap()
}

const SMALL: &str = "[run]\nseed = 7\n[grid]\nn = 16\n[solver]\nhorizon = 0.05\ndt = 0.01\n";

#[test]
fn simulate_equilibrium_passes_with_zero_norms() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "eq.toml", &format!("{SMALL}[data]\nkind = \"equilibrium\"\n"));
    let out = tmp.path().join("out");
    assert_eq!(barotropic(&out, &["simulate", "--config", &cfg]), 0);
    let m = manifest(&out, "simulate");
    assert_eq!(m["status"], "pass");
    assert_eq!(m["seed"], 7);
    let records = fs::read_to_string(out.join("simulate/records.csv")).unwrap();
    for line in records.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(&cols[1..4], &[0.0, 0.0, 0.0]);
    }
    assert!(out.join("simulate/snapshots/rho_00000.snap").exists());
}

#[test]
fn identical_inputs_give_identical_reports() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "small.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(barotropic(out, &["simulate", "--config", &cfg]), 0);
        assert_eq!(barotropic(out, &["verify", "--suite", "bony,decoupling", "--config", &cfg]), 0);
    }
    for file in [
        "simulate/records.csv",
        "simulate/monitor.csv",
        "simulate/manifest.json",
        "verify/checks.csv",
        "verify/manifest.json",
    ] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn zero_delta_probe_reports_zero() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "small.toml", SMALL);
    let out = tmp.path().join("out");
    assert_eq!(barotropic(&out, &["probe", "--config", &cfg, "--delta", "0"]), 0);
    let csv = fs::read_to_string(out.join("probe/probe.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(&cols[1..], &[0.0, 0.0]);
    }
}

#[test]
fn vacuum_run_fails_with_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        &tmp,
        "dip.toml",
        "[grid]\nn = 32\n[solver]\nhorizon = 1.0\ndt = 0.001\na_bound = 1e6\nsnapshot_every = 100\n[data]\nkind = \"dip\"\nspeed = 4.0\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(barotropic(&out, &["simulate", "--config", &cfg]), 1);
    let m = manifest(&out, "simulate");
    assert_eq!(m["status"], "fail");
    assert!(m["error"].as_str().unwrap().contains("vacuum"));
    let names: Vec<&str> = m["logged"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"continuation criterion density-away-from-zero"), "{names:?}");
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let bad = write(&tmp, "bad.toml", "[grid]\nn = 16\nfoo = 1\n");
    assert_eq!(barotropic(&out, &["simulate", "--config", &bad]), 2);
    let m = manifest(&out, "simulate");
    assert_eq!(m["status"], "usage-error");
    assert!(m["error"].as_str().unwrap().contains(":3:1 (key `foo`)"));

    let gate = write(&tmp, "gate.toml", "[solver]\np = 2.0\np1 = 3.0\n");
    assert_eq!(barotropic(&out, &["simulate", "--config", &gate]), 2);
    assert!(manifest(&out, "simulate")["error"].as_str().unwrap().contains("1 ≤ p₁ ≤ p"));

    let ok = write(&tmp, "ok.toml", SMALL);
    assert_eq!(barotropic(&out, &["verify", "--suite", "nope", "--config", &ok]), 2);
    assert_eq!(barotropic(&out, &["simulate"]), 2);
    assert_eq!(barotropic(&out, &["probe", "--config", &ok, "--delta", "-1"]), 2);
    assert_eq!(barotropic(&out, &["--help"]), 0);
}
