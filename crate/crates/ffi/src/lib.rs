//! C interface to the barotropic toolkit.
//!
//! Objects cross the boundary as opaque handles created by `bp_*_new` (or a
//! run function) and released by the matching `bp_*_free`. Every fallible
//! call returns a [`BpStatus`]; the message of the last failure on the
//! calling thread is available from [`bp_last_error_message`]. Panics are
//! caught at the boundary and reported as `BP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use barotropic::cli::{parse_config_str, ExperimentSpec, Mode};
use barotropic::lp::{besov_value, BesovParams, DyadicFilterBank};
use barotropic::ns::{continuation_monitor, run_partial, RunOutput};
use barotropic::spectral::{Field, Grid};
use barotropic::suites::{run_suite, Suite, SuiteOptions};
use barotropic::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    GridMismatch = 5,
    Cfl = 6,
    Vacuum = 7,
    NonFinite = 8,
    Io = 9,
    Panic = 10,
    Other = 11,
}

impl From<&Error> for BpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidGrid(_)
            | Error::InvalidParameter(_)
            | Error::ComponentMismatch { .. }
            | Error::GridTooSmall { .. }
            | Error::IndexConstraintViolated(_) => Self::InvalidArgument,
            Error::Parse { .. } | Error::Format(_) => Self::Parse,
            Error::Validation(_) => Self::Validation,
            Error::GridMismatch => Self::GridMismatch,
            Error::CflViolation { .. } => Self::Cfl,
            Error::VacuumApproach { .. } => Self::Vacuum,
            Error::NonFinite { .. } => Self::NonFinite,
            Error::Io(_) => Self::Io,
            _ => Self::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BpStatus, msg: impl Into<String>) -> BpStatus {
    set_error(msg.into());
    status
}

fn from_error(e: &Error) -> BpStatus {
    fail(BpStatus::from(e), e.to_string())
}

/// Runs `f`, turning a panic into `BP_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> BpStatus) -> BpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(BpStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn boxed<T>(value: T, out: *mut *mut T) -> BpStatus {
    // SAFETY: callers check `out` for null before calling.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    BpStatus::Ok
}

/// # Safety
/// `p` must be null or a pointer obtained from this library and not yet freed.
unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(BpStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Periodic grid on `[0, 2 pi)^dim`.
pub struct BpGrid {
    grid: Grid,
}

/// Sampled scalar or vector field.
pub struct BpField {
    field: Field,
}

/// Littlewood-Paley filter bank on a grid.
pub struct BpFilterBank {
    bank: DyadicFilterBank,
}

/// Parsed and validated experiment file.
pub struct BpExperiment {
    spec: ExperimentSpec,
}

/// Result of a nonlinear run.
pub struct BpRun {
    out: RunOutput,
    continuable: bool,
}

/// Norms of the state at one stored time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BpRecord {
    pub t: f64,
    pub a_norm: f64,
    pub u_norm: f64,
    pub v1_norm: f64,
    pub mass: f64,
    pub inf_one_plus_a: f64,
    pub kinetic: f64,
    pub potential: f64,
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn bp_grid_new(dim: usize, n: usize, out: *mut *mut BpGrid) -> BpStatus {
    guard(|| {
        non_null!(out);
        match Grid::periodic(dim, n) {
            Ok(grid) => boxed(BpGrid { grid }, out),
            Err(e) => from_error(&e),
        }
    })
}

/// Number of points of the grid, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn bp_grid_len(grid: *const BpGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.grid.len())
}

/// # Safety
/// `grid` must be null or a handle from `bp_grid_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bp_grid_free(grid: *mut BpGrid) {
    free(grid);
}

/// Field from `len = components * grid points` values, component-major.
///
/// # Safety
/// `values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_field_from_values(
    grid: *const BpGrid,
    components: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut BpField,
) -> BpStatus {
    guard(|| {
        non_null!(grid, values, out);
        let data = std::slice::from_raw_parts(values, len).to_vec();
        match Field::from_values(&(&*grid).grid, components, data) {
            Ok(field) => boxed(BpField { field }, out),
            Err(e) => from_error(&e),
        }
    })
}

/// Number of values of the field, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn bp_field_len(field: *const BpField) -> usize {
    field.as_ref().map_or(0, |f| f.field.values().len())
}

/// Copies the values into `out`, which holds `len` doubles.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bp_field_values(field: *const BpField, out: *mut f64, len: usize) -> BpStatus {
    guard(|| {
        non_null!(field, out);
        let v = (&*field).field.values();
        if len != v.len() {
            return fail(BpStatus::InvalidArgument, format!("buffer holds {len} values, field has {}", v.len()));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, len);
        BpStatus::Ok
    })
}

/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn bp_field_free(field: *mut BpField) {
    free(field);
}

/// Filter bank with ratio `alpha` in `(1, 4/3)`.
///
/// # Safety
/// `grid` must be a live grid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_filter_bank_new(grid: *const BpGrid, alpha: f64, out: *mut *mut BpFilterBank) -> BpStatus {
    guard(|| {
        non_null!(grid, out);
        match DyadicFilterBank::new(&(&*grid).grid, alpha) {
            Ok(bank) => boxed(BpFilterBank { bank }, out),
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `bank` must be null or a live filter bank handle.
#[no_mangle]
pub unsafe extern "C" fn bp_filter_bank_free(bank: *mut BpFilterBank) {
    free(bank);
}

/// `|field|_{B^s_{p,r}}`; pass `INFINITY` for infinite exponents.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_besov_norm(
    bank: *const BpFilterBank,
    field: *const BpField,
    s: f64,
    p: f64,
    r: f64,
    out: *mut f64,
) -> BpStatus {
    guard(|| {
        non_null!(bank, field, out);
        let result = BesovParams::new(s, p, r).and_then(|b| besov_value(&(&*field).field, b, &(&*bank).bank));
        match result {
            Ok(v) => {
                *out = v;
                BpStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Parses experiment text in the command line file format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_experiment_parse(text: *const c_char, out: *mut *mut BpExperiment) -> BpStatus {
    guard(|| {
        non_null!(text, out);
        let text = match CStr::from_ptr(text).to_str() {
            Ok(t) => t,
            Err(_) => return fail(BpStatus::InvalidArgument, "experiment text is not UTF-8"),
        };
        match parse_config_str(text, "<ffi>", Mode::Simulate) {
            Ok(spec) => boxed(BpExperiment { spec }, out),
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `exp` must be null or a live experiment handle.
#[no_mangle]
pub unsafe extern "C" fn bp_experiment_free(exp: *mut BpExperiment) {
    free(exp);
}

/// Runs the nonlinear solver. A run stopped early (vacuum, CFL) still
/// yields a handle; its stop reason is in `bp_run_status`.
///
/// # Safety
/// `exp` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_simulate(exp: *const BpExperiment, out: *mut *mut BpRun) -> BpStatus {
    guard(|| {
        non_null!(exp, out);
        let spec = &(&*exp).spec;
        let result = spec.data.build(&spec.solver).and_then(|data| run_partial(&spec.solver, &data));
        match result {
            Ok(run) => {
                let continuable = continuation_monitor(&run, &spec.solver).continuable;
                boxed(BpRun { out: run, continuable }, out)
            }
            Err(e) => from_error(&e),
        }
    })
}

/// `BP_STATUS_OK` when the run reached its horizon, else the stop reason
/// (also set as the last error message).
///
/// # Safety
/// `run` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn bp_run_status(run: *const BpRun) -> BpStatus {
    guard(|| {
        non_null!(run);
        match &(&*run).out.abort {
            None => BpStatus::Ok,
            Some(e) => from_error(e),
        }
    })
}

/// Number of stored records, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn bp_run_record_count(run: *const BpRun) -> usize {
    run.as_ref().map_or(0, |r| r.out.records.len())
}

/// # Safety
/// `run` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_run_record(run: *const BpRun, index: usize, out: *mut BpRecord) -> BpStatus {
    guard(|| {
        non_null!(run, out);
        let Some(r) = (&*run).out.records.get(index) else {
            return fail(BpStatus::InvalidArgument, format!("record {index} out of range"));
        };
        *out = BpRecord {
            t: r.t,
            a_norm: r.a_norm,
            u_norm: r.u_norm,
            v1_norm: r.v1_norm,
            mass: r.mass,
            inf_one_plus_a: r.inf_one_plus_a,
            kinetic: r.kinetic,
            potential: r.potential,
        };
        BpStatus::Ok
    })
}

/// Whether every monitored hypothesis held at every stored time, and whether
/// the continuation criteria hold.
///
/// # Safety
/// `run` must be live; the flags must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_run_verdict(run: *const BpRun, all_green: *mut bool, continuable: *mut bool) -> BpStatus {
    guard(|| {
        non_null!(run, all_green, continuable);
        *all_green = (&*run).out.monitor.all_green();
        *continuable = (&*run).continuable;
        BpStatus::Ok
    })
}

/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn bp_run_free(run: *mut BpRun) {
    free(run);
}

/// Runs one verification suite by name with the default sizes and `seed`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_verify_suite(name: *const c_char, seed: u64, passed: *mut bool) -> BpStatus {
    guard(|| {
        non_null!(name, passed);
        let suite: Suite = match CStr::from_ptr(name).to_str().map(str::parse) {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => return from_error(&e),
            Err(_) => return fail(BpStatus::InvalidArgument, "suite name is not UTF-8"),
        };
        let mut opts = SuiteOptions { seed, ..SuiteOptions::default() };
        opts.small.seed = seed;
        match run_suite(suite, &opts) {
            Ok(r) => {
                *passed = r.passed();
                BpStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}
