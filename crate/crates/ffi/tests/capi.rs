use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use barotropic_ffi::*;

fn last_error() -> String {
    let p = bp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn field_round_trip_and_besov_norm() {
    unsafe {
        let mut grid = ptr::null_mut();
        assert_eq!(bp_grid_new(2, 16, &mut grid), BpStatus::Ok);
        let n = bp_grid_len(grid);
        assert_eq!(n, 256);
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i / 16) as f64 * std::f64::consts::TAU / 16.0;
                (3.0 * x).cos()
            })
            .collect();
        let mut field = ptr::null_mut();
        assert_eq!(bp_field_from_values(grid, 1, values.as_ptr(), n, &mut field), BpStatus::Ok);
        let mut back = vec![0.0; bp_field_len(field)];
        assert_eq!(bp_field_values(field, back.as_mut_ptr(), back.len()), BpStatus::Ok);
        assert_eq!(back, values);
        assert_eq!(bp_field_values(field, back.as_mut_ptr(), 3), BpStatus::InvalidArgument);

        let mut bank = ptr::null_mut();
        assert_eq!(bp_filter_bank_new(grid, 8.0 / 7.0, &mut bank), BpStatus::Ok);
        let (mut b0, mut b2) = (0.0, 0.0);
        assert_eq!(bp_besov_norm(bank, field, 0.0, f64::INFINITY, f64::INFINITY, &mut b0), BpStatus::Ok);
        assert_eq!(bp_besov_norm(bank, field, 2.0, f64::INFINITY, f64::INFINITY, &mut b2), BpStatus::Ok);
        // A single mode |k| = 3 sits in the blocks around 2^l = 3.
        assert!(b0 > 0.0 && b2 / b0 > 2.0 && b2 / b0 < 16.0, "{b0} {b2}");
        assert_eq!(bp_besov_norm(bank, field, 0.0, 0.5, 1.0, &mut b0), BpStatus::InvalidArgument);

        bp_filter_bank_free(bank);
        bp_field_free(field);
        bp_grid_free(grid);
    }
}

#[test]
fn errors_are_reported_with_messages() {
    unsafe {
        assert_eq!(bp_grid_new(2, 16, ptr::null_mut()), BpStatus::NullPointer);
        assert!(last_error().contains("null pointer"));
        let mut grid = ptr::null_mut();
        assert_eq!(bp_grid_new(7, 16, &mut grid), BpStatus::InvalidArgument);
        assert!(grid.is_null());
        assert!(last_error().contains("grid"));

        let mut exp = ptr::null_mut();
        let bad = CString::new("[grid]\nfoo = 1\n").unwrap();
        assert_eq!(bp_experiment_parse(bad.as_ptr(), &mut exp), BpStatus::Parse);
        assert!(last_error().contains("foo"));
        let gate = CString::new("[solver]\np1 = 3.0\n").unwrap();
        assert_eq!(bp_experiment_parse(gate.as_ptr(), &mut exp), BpStatus::Validation);
        assert!(last_error().contains("1 ≤ p₁ ≤ p"));

        let mut passed = false;
        let name = CString::new("nope").unwrap();
        assert_eq!(bp_verify_suite(name.as_ptr(), 1, &mut passed), BpStatus::InvalidArgument);

        // Null handles are accepted by the free and count functions.
        bp_run_free(ptr::null_mut());
        assert_eq!(bp_run_record_count(ptr::null()), 0);
        assert_eq!(bp_run_status(ptr::null()), BpStatus::NullPointer);
    }
}

#[test]
fn simulation_through_handles() {
    unsafe {
        let text = CString::new("[grid]\nn = 16\n[solver]\nhorizon = 0.05\ndt = 0.01\n").unwrap();
        let mut exp = ptr::null_mut();
        assert_eq!(bp_experiment_parse(text.as_ptr(), &mut exp), BpStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(bp_simulate(exp, &mut run), BpStatus::Ok);
        assert_eq!(bp_run_status(run), BpStatus::Ok);
        assert_eq!(bp_run_record_count(run), 6);
        let mut first = BpRecord::default();
        let mut last = BpRecord::default();
        assert_eq!(bp_run_record(run, 0, &mut first), BpStatus::Ok);
        assert_eq!(bp_run_record(run, 5, &mut last), BpStatus::Ok);
        assert!((last.t - 0.05).abs() < 1e-14);
        assert!(((last.mass - first.mass) / first.mass).abs() < 1e-12);
        assert_eq!(bp_run_record(run, 6, &mut last), BpStatus::InvalidArgument);
        let (mut green, mut cont) = (false, false);
        assert_eq!(bp_run_verdict(run, &mut green, &mut cont), BpStatus::Ok);
        assert!(green && cont);
        bp_run_free(run);
        bp_experiment_free(exp);
    }
}

#[test]
fn early_stop_is_a_status_not_a_failure() {
    unsafe {
        let text = CString::new(
            "[grid]\nn = 32\n[solver]\nhorizon = 1.0\ndt = 0.001\na_bound = 1e6\n[data]\nkind = \"dip\"\nspeed = 4.0\n",
        )
        .unwrap();
        let mut exp = ptr::null_mut();
        assert_eq!(bp_experiment_parse(text.as_ptr(), &mut exp), BpStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(bp_simulate(exp, &mut run), BpStatus::Ok);
        assert_eq!(bp_run_status(run), BpStatus::Vacuum);
        assert!(last_error().contains("vacuum"));
        let (mut green, mut cont) = (true, true);
        assert_eq!(bp_run_verdict(run, &mut green, &mut cont), BpStatus::Ok);
        assert!(!cont);
        bp_run_free(run);
        bp_experiment_free(exp);
    }
}

#[test]
fn suite_runs_by_name() {
    let name = CString::new("bony").unwrap();
    let mut passed = false;
    assert_eq!(unsafe { bp_verify_suite(name.as_ptr(), 2024, &mut passed) }, BpStatus::Ok);
    assert!(passed);
    let version = unsafe { CStr::from_ptr(bp_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/barotropic.h")
}

#[test]
fn header_declares_the_interface() {
    let h = std::fs::read_to_string(header()).unwrap();
    for decl in [
        "typedef struct BpGrid BpGrid;",
        "typedef struct BpRun BpRun;",
        "BP_STATUS_OK = 0",
        "BP_STATUS_PANIC = 10",
        "enum BpStatus bp_simulate(const struct BpExperiment *exp, struct BpRun **out);",
        "const char *bp_last_error_message(void);",
    ] {
        assert!(h.contains(decl), "missing {decl}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "barotropic.h"

int main(void) {
    BpGrid *grid = NULL;
    if (bp_grid_new(2, 8, &grid) != BP_STATUS_OK) return 1;
    size_t n = bp_grid_len(grid);
    double values[64];
    for (size_t i = 0; i < n; ++i) values[i] = 1.0;
    BpField *field = NULL;
    if (bp_field_from_values(grid, 1, values, n, &field) != BP_STATUS_OK) return 2;
    if (bp_grid_new(9, 8, &grid) != BP_STATUS_INVALID_ARGUMENT) return 3;
    printf("%s\n", bp_last_error_message());
    bp_field_free(field);
    bp_grid_free(grid);
    return 0;
}
"#;

/// Compiles a C program against the header and the static library when a C
/// compiler is available.
#[test]
fn header_compiles_and_links_from_c() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.parent().unwrap().join("libbarotropic_ffi.a");
    let lib = if lib.exists() { lib } else { deps.join("libbarotropic_ffi.a") };
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let tmp = tempfile::TempDir::new().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = tmp.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{:?}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).contains("grid"));
}
