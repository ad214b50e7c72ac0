//! C ABI for `lpevol`.
//!
//! Specs and evolutions are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`LpevolStatus`]; the message of the most recent failure on the calling
//! thread is available from [`lpevol_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use lpevol::cli::{run, Command, RunOptions, RunSpec};
use lpevol::evolution::{evolve, EvolResult};
use lpevol::lebesgue::LpElement;
use lpevol::Error;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpevolStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidSpec = 3,
    NotInLp = 4,
    NoConvergence = 5,
    InvalidControl = 6,
    OutOfDomain = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpevolCommand {
    Norm = 0,
    Evolve = 1,
    Check = 2,
    Convergence = 3,
}

/// A parsed run specification.
pub struct LpevolSpec {
    spec: RunSpec,
}

/// An evolved trajectory.
pub struct LpevolEvolution {
    result: EvolResult,
    n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> LpevolStatus {
    match err {
        Error::NotInLp(_) => LpevolStatus::NotInLp,
        Error::NoConvergence { .. } => LpevolStatus::NoConvergence,
        Error::InvalidControl(_) => LpevolStatus::InvalidControl,
        Error::OutOfDomain { .. } => LpevolStatus::OutOfDomain,
        _ => LpevolStatus::InvalidSpec,
    }
}

fn fail(err: Error) -> LpevolStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs `f`, turning a panic into `Internal`.
fn guard<F: FnOnce() -> LpevolStatus>(f: F) -> LpevolStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            LpevolStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LpevolStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(LpevolStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        LpevolStatus::InvalidUtf8
    })
}

fn null_arg(name: &str) -> LpevolStatus {
    set_error(format!("{name} is null"));
    LpevolStatus::NullPointer
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lpevol_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lpevol_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn parse_spec(
    text: *const c_char,
    out: *mut *mut LpevolSpec,
    parse: fn(&str) -> lpevol::Result<RunSpec>,
) -> LpevolStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse(text) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(LpevolSpec { spec }));
                LpevolStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses a JSON run specification into `*out`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpevol_spec_from_json(json: *const c_char, out: *mut *mut LpevolSpec) -> LpevolStatus {
    parse_spec(json, out, RunSpec::from_json)
}

/// Parses a TOML run specification into `*out`.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpevol_spec_from_toml(toml: *const c_char, out: *mut *mut LpevolSpec) -> LpevolStatus {
    parse_spec(toml, out, RunSpec::from_toml)
}

/// # Safety
/// `spec` must be null or a handle from `lpevol_spec_from_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpevol_spec_free(spec: *mut LpevolSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Evolves the spec's control into `*out`.
///
/// # Safety
/// `spec` must be a live spec handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpevol_evolve(spec: *const LpevolSpec, out: *mut *mut LpevolEvolution) -> LpevolStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        *out = ptr::null_mut();
        let Some(spec) = spec.as_ref().map(|s| &s.spec) else {
            return null_arg("spec");
        };
        let result = spec
            .build_control(None)
            .and_then(|rep| LpElement::new(rep, spec.p, spec.evolve.quad))
            .and_then(|gamma| evolve(spec.group, &gamma, &spec.evolve));
        match result {
            Ok(result) => {
                let n = spec.group.ambient_dim();
                *out = Box::into_raw(Box::new(LpevolEvolution { result, n }));
                LpevolStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `evo` must be null or a handle from `lpevol_evolve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpevol_evolution_free(evo: *mut LpevolEvolution) {
    if !evo.is_null() {
        drop(Box::from_raw(evo));
    }
}

/// Side length `n` of the matrices in the trajectory; 0 for null.
///
/// # Safety
/// `evo` must be null or a live evolution handle.
#[no_mangle]
pub unsafe extern "C" fn lpevol_evolution_dim(evo: *const LpevolEvolution) -> usize {
    evo.as_ref().map_or(0, |e| e.n)
}

/// Writes `η(t)` row-major into `out[0..n*n]`.
///
/// # Safety
/// `evo` must be a live evolution handle and `out` must have room for `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn lpevol_evolution_eval(
    evo: *const LpevolEvolution,
    t: f64,
    out: *mut f64,
    len: usize,
) -> LpevolStatus {
    guard(|| {
        let Some(evo) = evo.as_ref() else {
            return null_arg("evo");
        };
        if out.is_null() {
            return null_arg("out");
        }
        if len < evo.n * evo.n {
            set_error(format!("need {} doubles, got {len}", evo.n * evo.n));
            return LpevolStatus::BufferTooSmall;
        }
        match evo.result.curve.eval(t) {
            Ok(m) => {
                let dst = std::slice::from_raw_parts_mut(out, evo.n * evo.n);
                for i in 0..evo.n {
                    for j in 0..evo.n {
                        dst[i * evo.n + j] = m[(i, j)];
                    }
                }
                LpevolStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Residual `‖δ(η) - γ‖_{L^1}` of the computed trajectory.
///
/// # Safety
/// `evo` must be null or a live evolution handle.
#[no_mangle]
pub unsafe extern "C" fn lpevol_evolution_residual(evo: *const LpevolEvolution) -> f64 {
    evo.as_ref().map_or(f64::NAN, |e| e.result.residual)
}

/// Runs a batch command as the command-line tool would, writing output
/// files under `out_dir` (null for the spec's `output.dir`). The JSON
/// report goes to `*report` (free with `lpevol_string_free`) and the
/// tool's exit code to `*exit_code`.
///
/// # Safety
/// `spec` must be a live spec handle, `out_dir` null or a NUL-terminated
/// string, `report` and `exit_code` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lpevol_run(
    spec: *const LpevolSpec,
    command: LpevolCommand,
    out_dir: *const c_char,
    deterministic: bool,
    report: *mut *mut c_char,
    exit_code: *mut i32,
) -> LpevolStatus {
    guard(|| {
        if report.is_null() || exit_code.is_null() {
            return null_arg("report/exit_code");
        }
        *report = ptr::null_mut();
        let Some(spec) = spec.as_ref().map(|s| &s.spec) else {
            return null_arg("spec");
        };
        let out_dir = if out_dir.is_null() {
            None
        } else {
            match read_str(out_dir) {
                Ok(s) => Some(PathBuf::from(s)),
                Err(s) => return s,
            }
        };
        let cmd = match command {
            LpevolCommand::Norm => Command::Norm,
            LpevolCommand::Evolve => Command::Evolve,
            LpevolCommand::Check => Command::Check,
            LpevolCommand::Convergence => Command::Convergence,
        };
        let opts = RunOptions {
            out_dir,
            deterministic,
            ..Default::default()
        };
        let outcome = run(cmd, spec, &opts);
        *exit_code = outcome.exit_code;
        match CString::new(outcome.report.to_string()) {
            Ok(s) => {
                *report = s.into_raw();
                LpevolStatus::Ok
            }
            Err(_) => {
                set_error("report contains NUL");
                LpevolStatus::Internal
            }
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpevol_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
