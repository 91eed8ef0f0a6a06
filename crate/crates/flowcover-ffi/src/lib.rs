//! C interface: opaque handles, status codes, and JSON report strings.
//!
//! Every function returns an [`FcStatus`]; results come back through out
//! parameters. Strings returned by the library must be released with
//! [`fc_string_free`], handles with their matching `_close` function.
//! [`fc_last_error`] returns a human-readable message for the most recent
//! failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use flowcover::boxmap::BoxMap;
use flowcover::chains::{verify_quasi_attracting, Schedule};
use flowcover::config::{parse_grid_spec, parse_seed_set};
use flowcover::error::Error;
use flowcover::flow::{builtin_system, FlowSpec, Point};
use flowcover::grid::EscapePolicy;
use flowcover::limits::check_connected_omega;
use flowcover::report::quasi_summary;

/// Status code of every library call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FcStatus {
    /// Success.
    FcOk = 0,
    /// A required pointer argument was null.
    FcNullPointer = 1,
    /// A string argument was not valid UTF-8.
    FcInvalidUtf8 = 2,
    /// Bad argument, unknown system, or malformed spec.
    FcInvalidArgument = 3,
    /// Numerical failure: trajectory blow-up or escape under the error
    /// policy.
    FcNumeric = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> FcStatus {
    match err {
        Error::NonFiniteState { .. } | Error::Escaped { .. } | Error::EscapeDominated => {
            FcStatus::FcNumeric
        }
        _ => FcStatus::FcInvalidArgument,
    }
}

fn fail(err: Error) -> FcStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, FcStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(FcStatus::FcNullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        FcStatus::FcInvalidUtf8
    })
}

/// A continuous flow (opaque).
pub struct FcFlow {
    inner: FlowSpec,
}

/// A combinatorial time-tau map over a grid (opaque).
pub struct FcBoxMap {
    inner: BoxMap,
}

/// Opens a built-in system by name.
///
/// # Safety
/// `name` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_open(name: *const c_char, out: *mut *mut FcFlow) -> FcStatus {
    if out.is_null() {
        set_error("null out pointer");
        return FcStatus::FcNullPointer;
    }
    let name = match cstr(name) {
        Ok(s) => s,
        Err(st) => return st,
    };
    match builtin_system(name) {
        Ok(flow) => {
            *out = Box::into_raw(Box::new(FcFlow { inner: flow }));
            FcStatus::FcOk
        }
        Err(e) => fail(e),
    }
}

/// Releases a flow handle. A null handle is a no-op.
///
/// # Safety
/// `flow` must come from [`fc_flow_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_close(flow: *mut FcFlow) {
    if !flow.is_null() {
        drop(Box::from_raw(flow));
    }
}

/// State dimension of a flow.
///
/// # Safety
/// `flow` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_dimension(flow: *const FcFlow) -> usize {
    if flow.is_null() {
        return 0;
    }
    (*flow).inner.dimension
}

/// Advances the state `x` (length `len`) by time `t`, writing the result
/// to `out` (same length). Negative `t` integrates backwards.
///
/// # Safety
/// `x` and `out` must point to `len` readable/writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_advance(
    flow: *const FcFlow,
    x: *const f64,
    len: usize,
    t: f64,
    out: *mut f64,
) -> FcStatus {
    if flow.is_null() || x.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FcStatus::FcNullPointer;
    }
    let flow = &(*flow).inner;
    let point = Point(std::slice::from_raw_parts(x, len).to_vec());
    match flow.advance(&point, t) {
        Ok(y) => {
            std::ptr::copy_nonoverlapping(y.0.as_ptr(), out, len);
            FcStatus::FcOk
        }
        Err(e) => fail(e),
    }
}

/// Builds a box map for a built-in system over a grid spec
/// (`x0,x1,y0,y1:nx,ny`) with sampling time `tau`.
///
/// # Safety
/// String arguments must be valid nul-terminated strings; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_boxmap_open(
    system: *const c_char,
    grid_spec: *const c_char,
    tau: f64,
    samples_per_axis: usize,
    out: *mut *mut FcBoxMap,
) -> FcStatus {
    if out.is_null() {
        set_error("null out pointer");
        return FcStatus::FcNullPointer;
    }
    let system = match cstr(system) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let grid_spec = match cstr(grid_spec) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let build = || -> Result<BoxMap, Error> {
        let flow = builtin_system(system)?;
        let grid = parse_grid_spec(grid_spec, EscapePolicy::Clip)?;
        BoxMap::from_flow(flow, grid, tau, samples_per_axis, None)
    };
    match build() {
        Ok(map) => {
            *out = Box::into_raw(Box::new(FcBoxMap { inner: map }));
            FcStatus::FcOk
        }
        Err(e) => fail(e),
    }
}

/// Releases a box map handle. A null handle is a no-op.
///
/// # Safety
/// `map` must come from [`fc_boxmap_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fc_boxmap_close(map: *mut FcBoxMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Total number of grid boxes of a box map.
///
/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_boxmap_box_count(map: *const FcBoxMap) -> usize {
    if map.is_null() {
        return 0;
    }
    (*map).inner.grid().box_count()
}

fn emit_json(value: &impl serde::Serialize, out: *mut *mut c_char) -> FcStatus {
    let json = match serde_json::to_string_pretty(value) {
        Ok(j) => j,
        Err(e) => {
            set_error(&e.to_string());
            return FcStatus::FcInvalidArgument;
        }
    };
    unsafe {
        *out = CString::new(json).unwrap().into_raw();
    }
    FcStatus::FcOk
}

/// Computes the eventual set of a seed region (`box:..`, `point:..`, or a
/// box-set file path) and returns the connectedness report as a JSON
/// string in `out_json`.
///
/// # Safety
/// `seed_spec` must be a valid nul-terminated string; `out_json` a valid
/// pointer. Free the result with [`fc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fc_omega_report(
    map: *const FcBoxMap,
    seed_spec: *const c_char,
    out_json: *mut *mut c_char,
) -> FcStatus {
    if map.is_null() || out_json.is_null() {
        set_error("null pointer argument");
        return FcStatus::FcNullPointer;
    }
    let seed_spec = match cstr(seed_spec) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let map = &(*map).inner;
    let run = || -> Result<_, Error> {
        let seed = parse_seed_set(seed_spec, map.grid())?;
        let (report, _) = check_connected_omega(map, &seed)?;
        Ok(report)
    };
    match run() {
        Ok(report) => emit_json(&report, out_json),
        Err(e) => fail(e),
    }
}

/// Runs the quasi-attracting verification of the chain limit of a seed
/// region and returns the summary as a JSON string. `eps0 <= 0` defaults
/// to 8 cell widths, `t0 <= 0` defaults to the map's tau; `stages` must be
/// at least 2.
///
/// # Safety
/// As [`fc_omega_report`].
#[no_mangle]
pub unsafe extern "C" fn fc_quasi_attracting_report(
    map: *const FcBoxMap,
    seed_spec: *const c_char,
    eps0: f64,
    t0: f64,
    stages: usize,
    out_json: *mut *mut c_char,
) -> FcStatus {
    if map.is_null() || out_json.is_null() {
        set_error("null pointer argument");
        return FcStatus::FcNullPointer;
    }
    let seed_spec = match cstr(seed_spec) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let map = &(*map).inner;
    let run = || -> Result<_, Error> {
        let seed = parse_seed_set(seed_spec, map.grid())?;
        let eps0 = if eps0 > 0.0 {
            eps0
        } else {
            8.0 * map.grid().max_width()
        };
        let t0 = if t0 > 0.0 { t0 } else { map.tau };
        let schedule = Schedule::geometric(eps0, t0, stages)?;
        let report = verify_quasi_attracting(map, &seed, &schedule)?;
        Ok(quasi_summary(&report))
    };
    match run() {
        Ok(summary) => emit_json(&summary, out_json),
        Err(e) => fail(e),
    }
}

/// Releases a string returned by this library. A null pointer is a no-op.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    #[test]
    fn version_is_non_empty() {
        let v = unsafe { CStr::from_ptr(fc_version()) };
        assert!(!v.to_str().unwrap().is_empty());
    }

    #[test]
    fn advance_matches_closed_form() {
        let name = CString::new("linear_sink_1d").unwrap();
        let mut flow: *mut FcFlow = ptr::null_mut();
        assert_eq!(
            unsafe { fc_flow_open(name.as_ptr(), &mut flow) },
            FcStatus::FcOk
        );
        assert_eq!(unsafe { fc_flow_dimension(flow) }, 1);
        let x = [1.0f64];
        let mut y = [0.0f64];
        let t = std::f64::consts::LN_2;
        assert_eq!(
            unsafe { fc_flow_advance(flow, x.as_ptr(), 1, t, y.as_mut_ptr()) },
            FcStatus::FcOk
        );
        assert!((y[0] - 0.5).abs() < 1e-9, "got {}", y[0]);
        unsafe { fc_flow_close(flow) };
    }

    #[test]
    fn unknown_system_sets_error() {
        let name = CString::new("nope").unwrap();
        let mut flow: *mut FcFlow = ptr::null_mut();
        let st = unsafe { fc_flow_open(name.as_ptr(), &mut flow) };
        assert_eq!(st, FcStatus::FcInvalidArgument);
        let msg = unsafe { CStr::from_ptr(fc_last_error()) };
        assert!(msg.to_str().unwrap().contains("nope"));
    }

    #[test]
    fn null_arguments_are_rejected() {
        let mut flow: *mut FcFlow = ptr::null_mut();
        assert_eq!(
            unsafe { fc_flow_open(ptr::null(), &mut flow) },
            FcStatus::FcNullPointer
        );
        let name = CString::new("vanderpol").unwrap();
        assert_eq!(
            unsafe { fc_flow_open(name.as_ptr(), ptr::null_mut()) },
            FcStatus::FcNullPointer
        );
    }

    #[test]
    fn omega_report_roundtrip() {
        let system = CString::new("linear_sink_2d").unwrap();
        let grid = CString::new("-2,2,-2,2:32,32").unwrap();
        let mut map: *mut FcBoxMap = ptr::null_mut();
        assert_eq!(
            unsafe { fc_boxmap_open(system.as_ptr(), grid.as_ptr(), 0.5, 3, &mut map) },
            FcStatus::FcOk
        );
        assert_eq!(unsafe { fc_boxmap_box_count(map) }, 1024);
        let seed = CString::new("box:0,0,0.9").unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { fc_omega_report(map, seed.as_ptr(), &mut json) },
            FcStatus::FcOk
        );
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["connected"], serde_json::Value::Bool(true));
        unsafe { fc_string_free(json) };
        unsafe { fc_boxmap_close(map) };
    }

    #[test]
    fn quasi_report_roundtrip() {
        let system = CString::new("linear_sink_2d").unwrap();
        let grid = CString::new("-2,2,-2,2:32,32").unwrap();
        let mut map: *mut FcBoxMap = ptr::null_mut();
        assert_eq!(
            unsafe { fc_boxmap_open(system.as_ptr(), grid.as_ptr(), 0.5, 3, &mut map) },
            FcStatus::FcOk
        );
        let seed = CString::new("box:0,0,0.9").unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { fc_quasi_attracting_report(map, seed.as_ptr(), 0.0, 0.0, 5, &mut json) },
            FcStatus::FcOk
        );
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["pass"], serde_json::Value::Bool(true));
        unsafe { fc_string_free(json) };
        unsafe { fc_boxmap_close(map) };
    }

    #[test]
    fn bad_schedule_is_invalid_argument() {
        let system = CString::new("linear_sink_2d").unwrap();
        let grid = CString::new("-2,2,-2,2:16,16").unwrap();
        let mut map: *mut FcBoxMap = ptr::null_mut();
        unsafe { fc_boxmap_open(system.as_ptr(), grid.as_ptr(), 0.5, 3, &mut map) };
        let seed = CString::new("box:0,0,0.9").unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { fc_quasi_attracting_report(map, seed.as_ptr(), 0.0, 0.0, 1, &mut json) },
            FcStatus::FcInvalidArgument
        );
        unsafe { fc_boxmap_close(map) };
    }
}
