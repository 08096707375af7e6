//! C interface to polycert.
//!
//! Objects cross the boundary as opaque handles created by `pc_*_from_*` or
//! `pc_encode_*` and released by the matching `pc_*_free`. Every call returns
//! a `PcStatus`; on failure `pc_last_error` describes the problem for the
//! calling thread. Results are JSON strings owned by the caller and released
//! with `pc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polycert::cyclecert::search_cycle_cert;
use polycert::encodings::{encode_coloring, parse_dimacs, Graph};
use polycert::fields::Field;
use polycert::fpnulla::{fpnulla_run, FpnullaStatus};
use polycert::nulla::{certificate_residual, nulla_run, NullCertJson, NullCertificate, NullaStatus, PolySystem};
use polycert::possatz::{psatz_search, theta1_optimize, verify_psatz, PsatzCertJson, PsatzCertificate, PsatzStatus, RealSystem, RealSystemJson, CERT_TOL};
use polycert::recover;
use polycert::sdpcore::SdpOptions;
use polycert::Error;
use serde_json::json;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Field = 5,
    CapExceeded = 6,
    InvalidCertificate = 7,
    Solver = 8,
    Degenerate = 9,
    RootOutsideExtension = 10,
    Internal = 11,
}

/// Polynomial system over a finite field or the rationals.
pub struct PcSystem(PolySystem);

/// Equations and inequalities over the reals.
pub struct PcRealSystem(RealSystem);

/// Simple undirected graph.
pub struct PcGraph(Graph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PcStatus {
    match e {
        Error::Parse(_) | Error::Io(_) => PcStatus::Parse,
        Error::FieldMismatch | Error::InvalidField(_) | Error::DivisionByZero => PcStatus::Field,
        Error::CapExceeded { .. } => PcStatus::CapExceeded,
        Error::InvalidCertificate(_) => PcStatus::InvalidCertificate,
        Error::Sdp(_) => PcStatus::Solver,
        Error::FailDegenerate | Error::NonCommuting | Error::ReductionEscape(_) => PcStatus::Degenerate,
        Error::RootOutsideExtension => PcStatus::RootOutsideExtension,
        Error::Arity(_) | Error::InvalidArgument(_) => PcStatus::InvalidArgument,
    }
}

struct Fail(PcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PcStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(PcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(PcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(PcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(PcStatus::NullPointer, "output pointer is null".into()));
    }
    let c = CString::new(s).map_err(|_| Fail(PcStatus::Internal, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(PcStatus::NullPointer, "output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn put_flag(out: *mut c_int, v: bool) {
    if !out.is_null() {
        *out = v as c_int;
    }
}

fn parse_err(e: serde_json::Error) -> Fail {
    Fail(PcStatus::Parse, e.to_string())
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a DIMACS edge list.
///
/// # Safety
/// `dimacs` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_from_dimacs(dimacs: *const c_char, out: *mut *mut PcGraph) -> PcStatus {
    guard(|| {
        let g = parse_dimacs(text(dimacs, "dimacs")?)?;
        put(out, PcGraph(g))
    })
}

/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_free(g: *mut PcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Parses a system from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_system_from_json(json: *const c_char, out: *mut *mut PcSystem) -> PcStatus {
    guard(|| {
        let s = PolySystem::from_json_str(text(json, "json")?)?;
        put(out, PcSystem(s))
    })
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_system_to_json(s: *const PcSystem, out: *mut *mut c_char) -> PcStatus {
    guard(|| put_string(out, handle(s, "system")?.0.to_json_string()))
}

/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_system_free(s: *mut PcSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// k-colouring system of `g` over the field named by `field`
/// (`f2`, `fp:<p>`, `gf:<p>:<k>` or `q`). A negative `anchor` leaves every
/// vertex free.
///
/// # Safety
/// `g` must be a live handle, `field` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_encode_coloring(g: *const PcGraph, k: u32, field: *const c_char, anchor: i64, out: *mut *mut PcSystem) -> PcStatus {
    guard(|| {
        let g = handle(g, "graph")?;
        let f = Field::parse_flag(text(field, "field")?)?;
        let a = if anchor < 0 { None } else { Some(anchor as usize) };
        put(out, PcSystem(encode_coloring(&g.0, k as usize, &f, a)?))
    })
}

/// Degree-by-degree certificate search. Writes a JSON report and sets
/// `infeasible` to 1 when a certificate was found.
///
/// # Safety
/// `s` must be a live handle; `out` writable; `infeasible` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pc_nulla(s: *const PcSystem, max_degree: u32, out: *mut *mut c_char, infeasible: *mut c_int) -> PcStatus {
    guard(|| {
        let sys = &handle(s, "system")?.0;
        let o = nulla_run(sys, max_degree)?;
        let cert = o.certificate.as_ref().map(|c| c.to_json(&sys.field));
        let v = json!({"status": o.status, "nulla_degree": o.nulla_degree, "bound": o.bound, "certificate": cert});
        put_string(out, v.to_string())?;
        put_flag(infeasible, o.status == NullaStatus::Infeasible);
        Ok(())
    })
}

/// Fixed-point run: infeasibility certificate or solution count.
///
/// # Safety
/// As for `pc_nulla`.
#[no_mangle]
pub unsafe extern "C" fn pc_fpnulla(s: *const PcSystem, max_degree: u32, out: *mut *mut c_char, decided: *mut c_int) -> PcStatus {
    guard(|| {
        let sys = &handle(s, "system")?.0;
        let o = fpnulla_run(sys, max_degree)?;
        let cert = o.certificate.as_ref().map(|c| c.to_json(&sys.field));
        let v = json!({
            "status": o.status,
            "solution_count": o.solution_count,
            "counts_multiplicity": o.counts_multiplicity,
            "degree": o.degree,
            "fpnulla_degree": o.fpnulla_degree,
            "certificate": cert,
        });
        put_string(out, v.to_string())?;
        put_flag(decided, o.status != FpnullaStatus::BoundReached);
        Ok(())
    })
}

/// All solutions over the smallest extension containing them.
///
/// # Safety
/// As for `pc_nulla`.
#[no_mangle]
pub unsafe extern "C" fn pc_solve(s: *const PcSystem, max_degree: u32, seed: u64, out: *mut *mut c_char, decided: *mut c_int) -> PcStatus {
    guard(|| {
        let sys = &handle(s, "system")?.0;
        let v = match recover::solve(sys, max_degree, seed)? {
            Some(rs) => {
                let rs = rs.minimal()?;
                json!({"status": if rs.roots.is_empty() { "INFEASIBLE" } else { "SOLVED" }, "count": rs.roots.len(), "extension": rs.field.spec(), "roots": rs.sorted()})
            }
            None => json!({"status": "BOUND_REACHED"}),
        };
        put_flag(decided, v["status"] != "BOUND_REACHED");
        put_string(out, v.to_string())
    })
}

/// Checks a Nullstellensatz certificate exactly; `valid` receives 1 or 0.
///
/// # Safety
/// `s` must be a live handle; `cert_json` NUL-terminated; `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_check_null_cert(s: *const PcSystem, cert_json: *const c_char, valid: *mut c_int) -> PcStatus {
    guard(|| {
        let sys = &handle(s, "system")?.0;
        let j: NullCertJson = serde_json::from_str(text(cert_json, "certificate")?).map_err(parse_err)?;
        let c = NullCertificate::from_json(&j, sys.nvars())?;
        if valid.is_null() {
            return Err(Fail(PcStatus::NullPointer, "valid is null".into()));
        }
        let ok = certificate_residual(sys, &c).map(|r| r.is_zero()).unwrap_or(false);
        if !ok {
            set_error("identity residual nonzero".into());
        }
        *valid = ok as c_int;
        Ok(())
    })
}

/// Searches for an oriented-cycle certificate; `found` receives 1 or 0.
///
/// # Safety
/// `g` must be a live handle; `out` writable; `found` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pc_cycle_cert(g: *const PcGraph, out: *mut *mut c_char, found: *mut c_int) -> PcStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let c = search_cycle_cert(g)?;
        put_flag(found, c.is_some());
        let v = match c {
            Some(c) => serde_json::to_value(c.to_json()).map_err(parse_err)?,
            None => json!({"status": "NOT_FOUND"}),
        };
        put_string(out, v.to_string())
    })
}

/// Parses `{"variables": [...], "equations": [...], "inequalities": [...]}`.
///
/// # Safety
/// `json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_real_system_from_json(json: *const c_char, out: *mut *mut PcRealSystem) -> PcStatus {
    guard(|| {
        let j: RealSystemJson = serde_json::from_str(text(json, "json")?).map_err(parse_err)?;
        put(out, PcRealSystem(RealSystem::from_json(&j)?))
    })
}

/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_real_system_free(s: *mut PcRealSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Positivstellensatz search up to `max_degree`; `found` receives 1 or 0.
///
/// # Safety
/// `s` must be a live handle; `out` writable; `found` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pc_psatz(s: *const PcRealSystem, max_degree: u32, out: *mut *mut c_char, found: *mut c_int) -> PcStatus {
    guard(|| {
        let sys = &handle(s, "system")?.0;
        let o = psatz_search(sys, max_degree, &SdpOptions::default())?;
        let best = o.exact.as_ref().or(o.certificate.as_ref()).map(|c| c.to_json());
        put_flag(found, o.status == PsatzStatus::Found);
        put_string(out, json!({"status": o.status, "degree": o.degree, "check": o.check, "certificate": best}).to_string())
    })
}

/// Checks a Positivstellensatz certificate; `valid` receives 1 or 0.
///
/// # Safety
/// `s` must be a live handle; `cert_json` NUL-terminated; `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_check_psatz_cert(s: *const PcRealSystem, cert_json: *const c_char, valid: *mut c_int) -> PcStatus {
    guard(|| {
        let sys = &handle(s, "system")?.0;
        let j: PsatzCertJson = serde_json::from_str(text(cert_json, "certificate")?).map_err(parse_err)?;
        let c = PsatzCertificate::from_json(&j, sys.nvars())?;
        if valid.is_null() {
            return Err(Fail(PcStatus::NullPointer, "valid is null".into()));
        }
        let chk = verify_psatz(sys, &c)?;
        let ok = if c.rationalized { chk.exact } else { chk.passes(CERT_TOL) };
        if !ok {
            set_error(format!("identity residual {:.3e}, min eigenvalue {:.3e}", chk.residual, chk.min_eig));
        }
        *valid = ok as c_int;
        Ok(())
    })
}

/// Theta-body bound for the stable-set number. `weights` may be NULL for
/// unit weights, otherwise it must hold one entry per vertex.
///
/// # Safety
/// `g` must be a live handle; `weights` NULL or readable for `n` doubles;
/// `value` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_theta1(g: *const PcGraph, weights: *const f64, value: *mut f64) -> PcStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        if value.is_null() {
            return Err(Fail(PcStatus::NullPointer, "value is null".into()));
        }
        let w = if weights.is_null() { None } else { Some(std::slice::from_raw_parts(weights, g.n())) };
        *value = theta1_optimize(g, w, &SdpOptions::default())?.value;
        Ok(())
    })
}
