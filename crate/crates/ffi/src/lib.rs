//! C ABI for the `fmhd` simulator.
//!
//! Configs, states and runs cross the boundary as opaque handles, each
//! released with the matching `fmhd_*_free`. Every fallible
//! call returns an [`FmhdStatus`]; on failure the message is available from
//! [`fmhd_last_error`] on the same thread until the next failing call.
//! Panics never unwind into the caller; they surface as
//! `FMHD_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fmhd::calculus::identity_suite;
use fmhd::checkpoint;
use fmhd::diagnostics::{
    breakdown_time, gronwall_bound, sobolev_norm, unit_drift, BetaSamples, GSpec, GronwallBound,
    COLUMNS,
};
use fmhd::dynamics::{divergence_drift, Simulation};
use fmhd::harness::{initial_state, parse_config_with, run, Outcome, SimConfig};
use fmhd::{Error, Grid, StateVector};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmhdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Out-of-range parameter, unknown name, or malformed input data.
    InvalidArgument = 3,
    /// Configuration document or override rejected.
    Config = 4,
    /// File system or checkpoint format failure.
    Io = 5,
    /// Non-finite values, broken invariants, or blow-up.
    Numerical = 6,
    /// A bug in the library; the message has details.
    Internal = 7,
}

/// Verdict of a run; matches the CLI exit status.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmhdOutcome {
    Pass = 0,
    ThresholdFailure = 1,
    BlowUp = 2,
}

/// Field selector for per-field queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmhdField {
    Velocity = 0,
    Magnetic = 1,
    Magnetisation = 2,
}

/// Validated simulation configuration.
pub struct FmhdConfig {
    inner: SimConfig,
}

/// One `(v, B, m)` state.
pub struct FmhdState {
    inner: StateVector,
}

/// A finished simulation with its diagnostics.
pub struct FmhdRun {
    sim: Simulation,
    outcome: Outcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_for(e: &Error) -> FmhdStatus {
    match e {
        Error::Config(_) => FmhdStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Checkpoint(_) => FmhdStatus::Io,
        Error::NonFinite { .. }
        | Error::BrokenSymmetry { .. }
        | Error::Invariant(_)
        | Error::BlowUp { .. } => FmhdStatus::Numerical,
        Error::InvalidGrid(_)
        | Error::InvalidParameter(_)
        | Error::GridMismatch
        | Error::Input(_) => FmhdStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), (FmhdStatus, String)>) -> FmhdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FmhdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            FmhdStatus::Internal
        }
    }
}

fn lib<T>(r: fmhd::Result<T>) -> Result<T, (FmhdStatus, String)> {
    r.map_err(|e| (status_for(&e), e.to_string()))
}

fn null(what: &str) -> (FmhdStatus, String) {
    (FmhdStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FmhdStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (FmhdStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FmhdStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FmhdStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fmhd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fmhd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML config document, then applies `n_overrides` `key=value`
/// strings. `overrides` may be null when `n_overrides` is 0.
///
/// # Safety
/// `text` must be a NUL-terminated string; `overrides` must point to
/// `n_overrides` NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_config_parse(
    text: *const c_char,
    overrides: *const *const c_char,
    n_overrides: usize,
    out: *mut *mut FmhdConfig,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let mut sets = Vec::with_capacity(n_overrides);
        if n_overrides > 0 {
            if overrides.is_null() {
                return Err(null("overrides"));
            }
            for i in 0..n_overrides {
                sets.push(str_arg(*overrides.add(i), "override")?.to_owned());
            }
        }
        let inner = lib(parse_config_with(text, &sets))?;
        *out = Box::into_raw(Box::new(FmhdConfig { inner }));
        Ok(())
    })
}

/// Flat dotted-key text of the config, which parses back to an equal config.
/// The returned string must be released with [`fmhd_string_free`].
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_config_emit(
    config: *const FmhdConfig,
    out: *mut *mut c_char,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let config = ref_arg(config, "config")?;
        *out = CString::new(config.inner.emit())
            .map_err(|e| (FmhdStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from [`fmhd_config_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fmhd_config_free(config: *mut FmhdConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fmhd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the configured simulation. With a non-null `output_dir`, writes the
/// diagnostics CSV, checkpoints and summary there. Blow-up is a successful
/// call whose outcome is `FMHD_OUTCOME_BLOW_UP`.
///
/// # Safety
/// `config` must be a live handle; `output_dir` null or NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run(
    config: *const FmhdConfig,
    output_dir: *const c_char,
    out: *mut *mut FmhdRun,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let config = ref_arg(config, "config")?;
        let dir = if output_dir.is_null() {
            None
        } else {
            Some(str_arg(output_dir, "output_dir")?)
        };
        let result = lib(run(&config.inner, dir.map(Path::new)))?;
        *out = Box::into_raw(Box::new(FmhdRun {
            outcome: result.study.outcome,
            sim: result.simulation,
        }));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from [`fmhd_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run_free(run: *mut FmhdRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run_outcome(run: *const FmhdRun) -> FmhdOutcome {
    match run.as_ref().map(|r| r.outcome) {
        Some(Outcome::Pass) | None => FmhdOutcome::Pass,
        Some(Outcome::ThresholdFailure) => FmhdOutcome::ThresholdFailure,
        Some(Outcome::BlowUp) => FmhdOutcome::BlowUp,
    }
}

/// Completed steps.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run_steps(run: *const FmhdRun) -> usize {
    run.as_ref().map_or(0, |r| r.sim.steps)
}

/// Last valid time before blow-up, or NaN when the run completed.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run_blow_up_time(run: *const FmhdRun) -> f64 {
    run.as_ref()
        .and_then(|r| r.sim.blow_up.as_ref())
        .map_or(f64::NAN, |b| b.last_valid_time)
}

/// Number of recorded diagnostics rows.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run_rows(run: *const FmhdRun) -> usize {
    run.as_ref().map_or(0, |r| r.sim.record.len())
}

/// One diagnostics value by CSV column name (`"time"`, `"J"`,
/// `"unit_drift_m"`, ...).
///
/// # Safety
/// `run` must be a live handle, `column` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run_value(
    run: *const FmhdRun,
    row: usize,
    column: *const c_char,
    out: *mut f64,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let run = ref_arg(run, "run")?;
        let column = str_arg(column, "column")?;
        let col = COLUMNS.iter().position(|c| *c == column).ok_or_else(|| {
            (
                FmhdStatus::InvalidArgument,
                format!("unknown column `{column}`"),
            )
        })?;
        let rows = run.sim.record.rows();
        let r = rows.get(row).ok_or_else(|| {
            (
                FmhdStatus::InvalidArgument,
                format!("row {row} out of range ({} rows)", rows.len()),
            )
        })?;
        *out = r.values()[col];
        Ok(())
    })
}

/// Writes the diagnostics CSV to `path`.
///
/// # Safety
/// `run` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run_write_csv(
    run: *const FmhdRun,
    path: *const c_char,
) -> FmhdStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        let path = str_arg(path, "path")?;
        let file =
            std::fs::File::create(path).map_err(|e| (FmhdStatus::Io, format!("{path}: {e}")))?;
        lib(run.sim.record.write_csv(std::io::BufWriter::new(file)))
    })
}

/// Copy of the last valid state of the run.
///
/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_run_final_state(
    run: *const FmhdRun,
    out: *mut *mut FmhdState,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let run = ref_arg(run, "run")?;
        *out = Box::into_raw(Box::new(FmhdState {
            inner: run.sim.final_state.clone(),
        }));
        Ok(())
    })
}

/// The configured initial data (random state projected onto the truncation).
///
/// # Safety
/// `config` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_initial(
    config: *const FmhdConfig,
    out: *mut *mut FmhdState,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let config = ref_arg(config, "config")?;
        let trunc = lib(config.inner.truncation())?;
        let (inner, _) = lib(initial_state(&config.inner, &trunc))?;
        *out = Box::into_raw(Box::new(FmhdState { inner }));
        Ok(())
    })
}

/// Reads a checkpoint file; the dealias fraction is not stored in the file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_read(
    path: *const c_char,
    dealias_fraction: f64,
    out: *mut *mut FmhdState,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let inner = lib(checkpoint::read(Path::new(path), dealias_fraction))?;
        *out = Box::into_raw(Box::new(FmhdState { inner }));
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_write(
    state: *const FmhdState,
    path: *const c_char,
) -> FmhdStatus {
    guard(|| {
        let state = ref_arg(state, "state")?;
        let path = str_arg(path, "path")?;
        lib(checkpoint::write(Path::new(path), &state.inner))
    })
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_free(state: *mut FmhdState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_time(state: *const FmhdState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.inner.time)
}

/// Points per axis.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_n(state: *const FmhdState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.grid().n())
}

/// Sobolev norm of order 0..=3 of one field.
///
/// # Safety
/// `state` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_sobolev_norm(
    state: *const FmhdState,
    field: FmhdField,
    order: u32,
    out: *mut f64,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let state = ref_arg(state, "state")?;
        if order > 3 {
            return Err((
                FmhdStatus::InvalidArgument,
                format!("Sobolev order must be in 0..=3, got {order}"),
            ));
        }
        *out = sobolev_norm(pick(&state.inner, field), order);
        Ok(())
    })
}

/// Largest spectral divergence of one field.
///
/// # Safety
/// `state` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_divergence_drift(
    state: *const FmhdState,
    field: FmhdField,
    out: *mut f64,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let state = ref_arg(state, "state")?;
        *out = divergence_drift(pick(&state.inner, field));
        Ok(())
    })
}

/// `max | |m|² - 1 |` over the collocation points.
///
/// # Safety
/// `state` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_state_unit_drift(
    state: *const FmhdState,
    out: *mut f64,
) -> FmhdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let state = ref_arg(state, "state")?;
        *out = unit_drift(&state.inner.m);
        Ok(())
    })
}

fn pick(s: &StateVector, field: FmhdField) -> &fmhd::SpectralField {
    match field {
        FmhdField::Velocity => &s.v,
        FmhdField::Magnetic => &s.b,
        FmhdField::Magnetisation => &s.m,
    }
}

/// Runs the vector-calculus identity suite on an `n³` grid. `worst` receives
/// the largest relative residual and `pass` 1 if every identity passes.
///
/// # Safety
/// `worst` and `pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_identity_suite(
    n: usize,
    seed: u64,
    worst: *mut f64,
    pass: *mut i32,
) -> FmhdStatus {
    guard(|| {
        let worst = out_arg(worst, "worst")?;
        let pass = out_arg(pass, "pass")?;
        let grid = lib(Grid::cube(n))?;
        let report = identity_suite(grid, seed);
        *worst = report.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        *pass = report.pass() as i32;
        Ok(())
    })
}

/// Gronwall bound at `t` for `g(s) = s^power` and constant `β` on `[a, t]`.
/// `*bound` is NaN and `*out_of_domain` is 1 once `∫β` leaves the range of
/// `G`. `*breakdown` receives the breakdown time of the bound, or infinity
/// when the bound stays finite for all times.
///
/// # Safety
/// `bound`, `out_of_domain` and `breakdown` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fmhd_gronwall_power(
    alpha: f64,
    power: f64,
    beta: f64,
    a: f64,
    t: f64,
    bound: *mut f64,
    out_of_domain: *mut i32,
    breakdown: *mut f64,
) -> FmhdStatus {
    guard(|| {
        let bound = out_arg(bound, "bound")?;
        let ood = out_arg(out_of_domain, "out_of_domain")?;
        let breakdown = out_arg(breakdown, "breakdown")?;
        if !(t >= a) {
            return Err((
                FmhdStatus::InvalidArgument,
                format!("t = {t} precedes a = {a}"),
            ));
        }
        let g = GSpec::Power(power);
        let beta_line = lib(BetaSamples::constant(beta, a, t.max(a + f64::EPSILON)))?;
        match lib(gronwall_bound(alpha, &beta_line, &g, t))? {
            GronwallBound::Bound(x) => {
                *bound = x;
                *ood = 0;
            }
            GronwallBound::OutOfDomain { .. } => {
                *bound = f64::NAN;
                *ood = 1;
            }
        }
        // Breakdown of the bound for β extended past t.
        let long = lib(BetaSamples::constant(beta, a, f64::MAX / 4.0))?;
        *breakdown = lib(breakdown_time(alpha, &long, &g))?.unwrap_or(f64::INFINITY);
        Ok(())
    })
}
