//! C ABI for boundlab.
//!
//! Every object crosses the boundary as an opaque pointer that the caller
//! releases with the matching `bl_*_free`. Every fallible call returns a
//! [`BlStatus`]; on failure, [`bl_last_error`] describes what went wrong on
//! the calling thread. Panics are caught and reported as
//! `BL_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use boundlab::bnb::{solve, SolveLimits, SolveOptions, SolveResult};
use boundlab::instance::{read_instance, Family, FamilyParams, MilpInstance};
use boundlab::model::{load_model, FusionEnsemble};
use boundlab::select::{PairScorer, Selector, SelectorKind};
use boundlab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Parse = 3,
    SchemaVersion = 4,
    Io = 5,
    MissingModel = 6,
    NoSolution = 7,
    Numerical = 8,
    Internal = 9,
}

/// An instance loaded or generated through [`bl_instance_read`] or
/// [`bl_instance_generate`].
pub struct BlInstance(MilpInstance);

/// A trained model loaded with [`bl_model_load`].
pub struct BlModel(Arc<FusionEnsemble>);

/// The outcome of [`bl_solve`].
pub struct BlResult {
    inner: SolveResult,
    status: CString,
    reported_objective: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("no interior nul"));
}

fn status_of(e: &Error) -> BlStatus {
    match e {
        Error::InvalidArgument(_) | Error::EmptyDataset(_) => BlStatus::InvalidArgument,
        Error::Parse { .. } => BlStatus::Parse,
        Error::SchemaVersion { .. } => BlStatus::SchemaVersion,
        Error::Io { .. } => BlStatus::Io,
        Error::MissingModel(_) => BlStatus::MissingModel,
        Error::Stalled { .. } | Error::NonFinite(_) => BlStatus::Numerical,
        Error::Determinism(_) => BlStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (BlStatus, String)>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            BlStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (BlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BlStatus, String) {
    (BlStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or a valid nul-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (BlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (BlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message describing the last failure on this thread; empty after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads an instance file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_instance_read(path: *const c_char, out: *mut *mut BlInstance) -> BlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = PathBuf::from(text(path, "path")?);
        let inst = read_instance(&path).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(BlInstance(inst)));
        Ok(())
    })
}

/// Generates one instance of `family` (`setcover`, `auction`, `cfl`) at a
/// size `preset` (`tiny`, `easy`, `medium`).
///
/// # Safety
/// String arguments must be nul-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_instance_generate(
    family: *const c_char,
    preset: *const c_char,
    seed: u64,
    out: *mut *mut BlInstance,
) -> BlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let family: Family = text(family, "family")?.parse().map_err(lib_err)?;
        let params = FamilyParams::preset(family, text(preset, "preset")?).map_err(lib_err)?;
        let inst = params.generate(seed).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(BlInstance(inst)));
        Ok(())
    })
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_instance_num_vars(inst: *const BlInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.num_vars)
}

/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_instance_free(inst: *mut BlInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Loads a trained model file.
///
/// # Safety
/// `path` must be nul-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_model_load(path: *const c_char, out: *mut *mut BlModel) -> BlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = load_model(text(path, "path")?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(BlModel(Arc::new(model))));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_model_free(model: *mut BlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Solves `inst` with full strong branching and the named selector
/// (`dfs`, `bfs`, `bes`, `learned`; the last needs `model`). A negative
/// `node_limit` means no limit; times use the deterministic work clock.
///
/// # Safety
/// Handles must be live (`model` may be null), `selector` nul-terminated
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_solve(
    inst: *const BlInstance,
    selector: *const c_char,
    model: *const BlModel,
    time_limit: f64,
    node_limit: i64,
    out: *mut *mut BlResult,
) -> BlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = &inst.as_ref().ok_or_else(|| null("inst"))?.0;
        let kind: SelectorKind = text(selector, "selector")?.parse().map_err(lib_err)?;
        let selector = match kind {
            SelectorKind::Learned => {
                let m = model.as_ref().ok_or_else(|| {
                    (BlStatus::MissingModel, "the learned selector needs a model".to_string())
                })?;
                Selector::learned(m.0.clone() as Arc<dyn PairScorer>)
            }
            k => Selector::heuristic(k).map_err(lib_err)?,
        };
        if !(time_limit > 0.0) {
            return Err((BlStatus::InvalidArgument, "time_limit must be positive".into()));
        }
        let opts = SolveOptions {
            limits: SolveLimits {
                node_limit: usize::try_from(node_limit).ok(),
                time_limit,
            },
            ..SolveOptions::default()
        };
        let res = solve(inst, selector, &opts).map_err(lib_err)?;
        let reported_objective = inst.reported_objective(res.incumbent_objective);
        *out = Box::into_raw(Box::new(BlResult {
            status: CString::new(res.status.name()).expect("status names have no nul"),
            inner: res,
            reported_objective,
        }));
        Ok(())
    })
}

/// Status name (`optimal`, `infeasible`, `node-limit`, `time-limit`);
/// valid while the result lives. Null for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_result_status(res: *const BlResult) -> *const c_char {
    res.as_ref().map_or(std::ptr::null(), |r| r.status.as_ptr())
}

/// Incumbent objective in the instance's own sense.
///
/// # Safety
/// `res` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_result_objective(res: *const BlResult, out: *mut f64) -> BlStatus {
    guard(|| {
        let r = res.as_ref().ok_or_else(|| null("res"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !r.inner.has_incumbent() {
            return Err((BlStatus::NoSolution, "no feasible solution was found".into()));
        }
        *out = r.reported_objective;
        Ok(())
    })
}

/// Copies the incumbent into `buf`, which must hold `len` >= number of
/// variables entries.
///
/// # Safety
/// `res` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bl_result_solution(res: *const BlResult, buf: *mut f64, len: usize) -> BlStatus {
    guard(|| {
        let r = res.as_ref().ok_or_else(|| null("res"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let x = r
            .inner
            .incumbent
            .as_ref()
            .ok_or_else(|| (BlStatus::NoSolution, "no feasible solution was found".to_string()))?;
        if len < x.len() {
            return Err((
                BlStatus::InvalidArgument,
                format!("buffer holds {len} values, solution has {}", x.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, x.len()).copy_from_slice(x);
        Ok(())
    })
}

/// Processed nodes, or 0 for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_result_nodes(res: *const BlResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.nodes_processed)
}

/// Nodes processed when the best incumbent was found.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_result_bpb_nodes(res: *const BlResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.bpb_nodes)
}

/// Solve time in seconds on the work clock.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_result_solve_time(res: *const BlResult) -> f64 {
    res.as_ref().map_or(0.0, |r| r.inner.solve_time)
}

/// # Safety
/// `res` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_result_free(res: *mut BlResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}
