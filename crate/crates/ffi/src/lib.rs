//! C ABI for the teleportation-switch simulator.
//!
//! Opaque handles own all heap state; every function returns a
//! [`CvsStatus`] code and writes results through out-pointers. On any
//! non-zero status, `cvs_last_error_message` returns a thread-local,
//! NUL-terminated description valid until the next failing call on the
//! same thread.
//!
//! The generated header lands in `include/cvswitch.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use cvswitch::algebra::variance;
use cvswitch::dsl;
use cvswitch::montecarlo::{sample_switch, ShotConfig};
use cvswitch::protocol::{switch_report, Route, SwitchParams};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let c = CString::new(msg.to_string()).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Status codes returned by every API function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    InvalidUtf8 = 3,
    ParseError = 4,
    UnknownName = 5,
    SamplingError = 6,
}

/// Which receiver a per-receiver query refers to.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvsBob {
    Bob1 = 0,
    Bob2 = 1,
}

/// Routing verdict.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvsRoute {
    RouteBob1 = 0,
    RouteBob2 = 1,
    RouteNone = 2,
}

/// Analytic report for one parameter point.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CvsReport {
    pub v1_x: f64,
    pub v1_y: f64,
    pub v2_x: f64,
    pub v2_y: f64,
    pub f1: f64,
    pub f2: f64,
    pub w35_total: f64,
    pub w36_total: f64,
    pub route: CvsRoute,
}

/// Monte-Carlo moment estimates for one output mode.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CvsMoments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub se_var_x: f64,
    pub se_var_y: f64,
    pub n: u64,
}

/// Opaque parameter handle.
pub struct CvsParams {
    inner: SwitchParams,
}

/// Opaque handle to a parsed and elaborated circuit.
pub struct CvsCircuit {
    elaborated: dsl::Elaborated,
}

/// Last error message for this thread; empty string if none.
#[no_mangle]
pub extern "C" fn cvs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Allocates a parameter set. Input variances are the coherent-state unit.
/// Returns NULL if any value is non-finite.
#[no_mangle]
pub extern "C" fn cvs_params_new(
    r_a: f64,
    r_b: f64,
    g1: f64,
    g2: f64,
    alpha_re: f64,
    alpha_im: f64,
) -> *mut CvsParams {
    let p = SwitchParams::new(r_a, r_b, g1, g2).with_alpha(alpha_re, alpha_im);
    if let Err(e) = p.validate() {
        set_error(e);
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(CvsParams { inner: p }))
}

/// Frees a parameter handle. NULL is ignored.
///
/// # Safety
/// `p` must come from `cvs_params_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cvs_params_free(p: *mut CvsParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Fills `out` with the analytic report for `p`.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cvs_report(p: *const CvsParams, out: *mut CvsReport) -> CvsStatus {
    let (Some(p), Some(out)) = (p.as_ref(), out.as_mut()) else {
        set_error("null pointer");
        return CvsStatus::NullPointer;
    };
    match switch_report(&p.inner) {
        Ok(r) => {
            *out = CvsReport {
                v1_x: r.v1_x,
                v1_y: r.v1_y,
                v2_x: r.v2_x,
                v2_y: r.v2_y,
                f1: r.f1,
                f2: r.f2,
                w35_total: r.w35.total,
                w36_total: r.w36.total,
                route: match r.route {
                    Route::Bob1 => CvsRoute::RouteBob1,
                    Route::Bob2 => CvsRoute::RouteBob2,
                    Route::None => CvsRoute::RouteNone,
                },
            };
            CvsStatus::Ok
        }
        Err(e) => {
            set_error(e);
            CvsStatus::InvalidParams
        }
    }
}

/// Teleportation fidelity at the chosen receiver.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cvs_fidelity(
    p: *const CvsParams,
    which: CvsBob,
    out: *mut f64,
) -> CvsStatus {
    let (Some(p), Some(out)) = (p.as_ref(), out.as_mut()) else {
        set_error("null pointer");
        return CvsStatus::NullPointer;
    };
    let bob = match which {
        CvsBob::Bob1 => cvswitch::protocol::Bob::Bob1,
        CvsBob::Bob2 => cvswitch::protocol::Bob::Bob2,
    };
    match cvswitch::protocol::fidelity(&p.inner, bob) {
        Ok(f) => {
            *out = f;
            CvsStatus::Ok
        }
        Err(e) => {
            set_error(e);
            CvsStatus::InvalidParams
        }
    }
}

/// Monte-Carlo moment estimates for both receivers. Deterministic in
/// (`shots`, `seed`).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cvs_mc_sample(
    p: *const CvsParams,
    shots: u64,
    seed: u64,
    bob1: *mut CvsMoments,
    bob2: *mut CvsMoments,
) -> CvsStatus {
    let (Some(p), Some(bob1), Some(bob2)) = (p.as_ref(), bob1.as_mut(), bob2.as_mut()) else {
        set_error("null pointer");
        return CvsStatus::NullPointer;
    };
    if shots < 1 {
        set_error("shots must be at least 1");
        return CvsStatus::InvalidParams;
    }
    match sample_switch(&p.inner, &ShotConfig::new(shots, seed)) {
        Ok((m1, m2)) => {
            for (dst, m) in [(bob1, m1), (bob2, m2)] {
                *dst = CvsMoments {
                    mean_x: m.mean_x,
                    mean_y: m.mean_y,
                    var_x: m.var_x,
                    var_y: m.var_y,
                    se_var_x: m.se_var_x,
                    se_var_y: m.se_var_y,
                    n: m.n,
                };
            }
            CvsStatus::Ok
        }
        Err(e) => {
            set_error(e);
            CvsStatus::SamplingError
        }
    }
}

/// Parses and elaborates circuit source (UTF-8, NUL-terminated). On parse
/// failure the error message carries `line:column`.
///
/// # Safety
/// `source` must be a valid C string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cvs_circuit_parse(
    source: *const c_char,
    out: *mut *mut CvsCircuit,
) -> CvsStatus {
    if source.is_null() || out.is_null() {
        set_error("null pointer");
        return CvsStatus::NullPointer;
    }
    let Ok(text) = CStr::from_ptr(source).to_str() else {
        set_error("source is not valid UTF-8");
        return CvsStatus::InvalidUtf8;
    };
    match dsl::parse(text) {
        Ok(ast) => {
            let circuit = CvsCircuit { elaborated: dsl::elaborate(&ast) };
            *out = Box::into_raw(Box::new(circuit));
            CvsStatus::Ok
        }
        Err(e) => {
            set_error(e);
            CvsStatus::ParseError
        }
    }
}

/// Frees a circuit handle. NULL is ignored.
///
/// # Safety
/// `c` must come from `cvs_circuit_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cvs_circuit_free(c: *mut CvsCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of OUTPUT modes in the circuit.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cvs_circuit_output_count(
    c: *const CvsCircuit,
    out: *mut usize,
) -> CvsStatus {
    let (Some(c), Some(out)) = (c.as_ref(), out.as_mut()) else {
        set_error("null pointer");
        return CvsStatus::NullPointer;
    };
    *out = c.elaborated.outputs.len();
    CvsStatus::Ok
}

/// Means and variances of a named OUTPUT mode: writes
/// {mean_x, mean_y, var_x, var_y} into `stats`.
///
/// # Safety
/// Pointers must be valid; `stats` must have room for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn cvs_circuit_output_stats(
    c: *const CvsCircuit,
    name: *const c_char,
    stats: *mut f64,
) -> CvsStatus {
    if c.is_null() || name.is_null() || stats.is_null() {
        set_error("null pointer");
        return CvsStatus::NullPointer;
    }
    let c = &*c;
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        set_error("name is not valid UTF-8");
        return CvsStatus::InvalidUtf8;
    };
    let Some(mode) = c.elaborated.outputs.get(name) else {
        set_error(format!("`{name}` is not an OUTPUT of the circuit"));
        return CvsStatus::UnknownName;
    };
    let vals = [
        mode.x.mean(),
        mode.y.mean(),
        variance(&mode.x, &c.elaborated.noise),
        variance(&mode.y, &c.elaborated.noise),
    ];
    ptr::copy_nonoverlapping(vals.as_ptr(), stats, 4);
    CvsStatus::Ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_via_ffi_matches_library() {
        let p = cvs_params_new(3.0, -3.0, 1.0, 1.0, 0.0, 0.0);
        assert!(!p.is_null());
        let mut rep = CvsReport {
            v1_x: 0.0,
            v1_y: 0.0,
            v2_x: 0.0,
            v2_y: 0.0,
            f1: 0.0,
            f2: 0.0,
            w35_total: 0.0,
            w36_total: 0.0,
            route: CvsRoute::RouteNone,
        };
        unsafe {
            assert_eq!(cvs_report(p, &mut rep), CvsStatus::Ok);
            cvs_params_free(p);
        }
        assert!(rep.f1 > 0.997);
        assert_eq!(rep.route, CvsRoute::RouteBob1);
    }

    #[test]
    fn invalid_params_yield_null_and_message() {
        let p = cvs_params_new(f64::NAN, 0.0, 1.0, 1.0, 0.0, 0.0);
        assert!(p.is_null());
        let msg = unsafe { CStr::from_ptr(cvs_last_error_message()) };
        assert!(!msg.to_bytes().is_empty());
    }

    #[test]
    fn circuit_parse_and_stats() {
        let src = CString::new("VACUUM v\nOUTPUT v\n").unwrap();
        let mut handle: *mut CvsCircuit = ptr::null_mut();
        unsafe {
            assert_eq!(cvs_circuit_parse(src.as_ptr(), &mut handle), CvsStatus::Ok);
            let mut n = 0usize;
            assert_eq!(cvs_circuit_output_count(handle, &mut n), CvsStatus::Ok);
            assert_eq!(n, 1);
            let name = CString::new("v").unwrap();
            let mut stats = [0.0; 4];
            assert_eq!(
                cvs_circuit_output_stats(handle, name.as_ptr(), stats.as_mut_ptr()),
                CvsStatus::Ok
            );
            assert_eq!(stats[2], 1.0);
            cvs_circuit_free(handle);
        }
    }

    #[test]
    fn parse_error_reports_line_and_column() {
        let src = CString::new("VACUUM v\nBS a b v v minus\nOUTPUT v\n").unwrap();
        let mut handle: *mut CvsCircuit = ptr::null_mut();
        unsafe {
            assert_eq!(
                cvs_circuit_parse(src.as_ptr(), &mut handle),
                CvsStatus::ParseError
            );
            let msg = CStr::from_ptr(cvs_last_error_message()).to_str().unwrap();
            assert!(msg.starts_with("2:"), "message was: {msg}");
        }
    }

    #[test]
    fn mc_sample_is_deterministic_through_ffi() {
        let p = cvs_params_new(1.0, 0.0, 1.0, 1.0, 0.5, 0.0);
        let blank = CvsMoments {
            mean_x: 0.0,
            mean_y: 0.0,
            var_x: 0.0,
            var_y: 0.0,
            se_var_x: 0.0,
            se_var_y: 0.0,
            n: 0,
        };
        let (mut a1, mut a2, mut b1, mut b2) = (blank, blank, blank, blank);
        unsafe {
            assert_eq!(cvs_mc_sample(p, 10_000, 7, &mut a1, &mut a2), CvsStatus::Ok);
            assert_eq!(cvs_mc_sample(p, 10_000, 7, &mut b1, &mut b2), CvsStatus::Ok);
            cvs_params_free(p);
        }
        assert_eq!(a1.var_x.to_bits(), b1.var_x.to_bits());
        assert_eq!(a2.mean_y.to_bits(), b2.mean_y.to_bits());
        assert_eq!(a1.n, 10_000);
    }
}
