//! C ABI over the plastsym toolkit.
//!
//! Conventions, mirrored in `include/plastsym.h`:
//!
//! * Handles (`plastsym_expr`, `plastsym_env`) are opaque pointers created
//!   and destroyed by this library; the matching `_free` accepts NULL.
//! * Every fallible function returns a `PLASTSYM_*` status code; out-values
//!   travel through pointer arguments and are written only on `PLASTSYM_OK`
//!   (except `needed`, see below). A human-readable description of the most
//!   recent failure on the calling thread is available through
//!   [`plastsym_last_error_message`].
//! * Strings cross the boundary as NUL-terminated UTF-8. Functions that
//!   produce text take `(buf, cap, needed)`: `*needed` is always set to the
//!   full length including the terminating NUL, and the call returns
//!   `PLASTSYM_ERR_BUFFER_TOO_SMALL` without writing when `cap` is
//!   insufficient — pass `buf = NULL, cap = 0` to query the size.
//! * Panics never unwind across the boundary; they surface as
//!   `PLASTSYM_ERR_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use plastsym::prolong::{check_symmetry, symmetry_opts, system, Force};
use plastsym::solutions::{
    by_name, family_names, flow_field, residual, sample_points, to_csv, GridSpec,
};
use plastsym::symexpr::{is_zero, parse, Env, EvalError, Expr, ZeroOpts};
use plastsym::vfield::{check_table, parse_generator};
use plastsym::vfield::generators as gen;

// ---------------------------------------------------------------------------
// Status codes (values mirrored in the header)
// ---------------------------------------------------------------------------

pub const PLASTSYM_OK: i32 = 0;
pub const PLASTSYM_ERR_NULL_ARGUMENT: i32 = 1;
pub const PLASTSYM_ERR_INVALID_UTF8: i32 = 2;
pub const PLASTSYM_ERR_PARSE: i32 = 3;
pub const PLASTSYM_ERR_UNBOUND_SYMBOL: i32 = 4;
pub const PLASTSYM_ERR_DOMAIN: i32 = 5;
pub const PLASTSYM_ERR_UNKNOWN_NAME: i32 = 6;
pub const PLASTSYM_ERR_INVALID_ARGUMENT: i32 = 7;
pub const PLASTSYM_ERR_BUFFER_TOO_SMALL: i32 = 8;
pub const PLASTSYM_ERR_EVAL: i32 = 9;
pub const PLASTSYM_ERR_PANIC: i32 = 10;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(code: i32, message: impl Into<String>) -> i32 {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
    code
}

/// Record diagnostic text for a call that still succeeds — used to expose
/// the first failing check's witness next to a `PLASTSYM_OK` return.
fn note(message: String) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn eval_error(e: EvalError) -> i32 {
    let code = match &e {
        EvalError::UnboundSymbol { .. } => PLASTSYM_ERR_UNBOUND_SYMBOL,
        EvalError::DomainViolation { .. } => PLASTSYM_ERR_DOMAIN,
        EvalError::QuadratureFailure { .. } => PLASTSYM_ERR_EVAL,
    };
    fail(code, e.to_string())
}

/// Run a body that may touch arbitrary library code, converting panics into
/// a status instead of undefined behaviour at the boundary.
fn guarded(body: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic of unknown type".into());
            fail(PLASTSYM_ERR_PANIC, format!("internal panic: {msg}"))
        }
    }
}

// ---------------------------------------------------------------------------
// Opaque handles
// ---------------------------------------------------------------------------

/// Opaque expression handle (`struct plastsym_expr` in C).
pub struct PlastsymExpr(Expr);

/// Opaque evaluation-environment handle (`struct plastsym_env` in C).
pub struct PlastsymEnv(Env);

unsafe fn cstr<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, i32> {
    if ptr.is_null() {
        return Err(fail(
            PLASTSYM_ERR_NULL_ARGUMENT,
            format!("{what} is NULL"),
        ));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(PLASTSYM_ERR_INVALID_UTF8, format!("{what} is not UTF-8")))
}

fn require<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, i32> {
    unsafe { ptr.as_ref() }
        .ok_or_else(|| fail(PLASTSYM_ERR_NULL_ARGUMENT, format!("{what} is NULL")))
}

fn require_mut<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, i32> {
    unsafe { ptr.as_mut() }
        .ok_or_else(|| fail(PLASTSYM_ERR_NULL_ARGUMENT, format!("{what} is NULL")))
}

/// Copy `text` (plus NUL) into `buf` under the `(buf, cap, needed)` protocol.
fn write_text(text: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> i32 {
    let total = text.len() + 1;
    if let Ok(out) = require_mut(needed, "needed") {
        *out = total;
    } else {
        return PLASTSYM_ERR_NULL_ARGUMENT;
    }
    if buf.is_null() || cap < total {
        return fail(
            PLASTSYM_ERR_BUFFER_TOO_SMALL,
            format!("buffer of {cap} bytes, {total} required"),
        );
    }
    unsafe {
        std::ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
    }
    PLASTSYM_OK
}

// ---------------------------------------------------------------------------
// Library info and error retrieval
// ---------------------------------------------------------------------------

/// Version of the underlying library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn plastsym_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message. Returns the full length
/// (including NUL) regardless of how much fit; never fails.
#[no_mangle]
pub extern "C" fn plastsym_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let total = msg.len() + 1;
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        total
    })
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

/// Parse an expression from text into a new handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn plastsym_expr_parse(
    text: *const c_char,
    out: *mut *mut PlastsymExpr,
) -> i32 {
    guarded(|| {
        let out = match require_mut(out, "out") {
            Ok(o) => o,
            Err(c) => return c,
        };
        let text = match unsafe { cstr(text, "text") } {
            Ok(t) => t,
            Err(c) => return c,
        };
        match parse(text) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(PlastsymExpr(e)));
                PLASTSYM_OK
            }
            Err(e) => fail(PLASTSYM_ERR_PARSE, e.to_string()),
        }
    })
}

/// Destroy an expression handle (NULL is a no-op).
///
/// # Safety
/// `e` must be NULL or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn plastsym_expr_free(e: *mut PlastsymExpr) {
    if !e.is_null() {
        drop(unsafe { Box::from_raw(e) });
    }
}

/// Render an expression back to text under the `(buf, cap, needed)` protocol.
///
/// # Safety
/// Pointer arguments must be valid; `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plastsym_expr_to_string(
    e: *const PlastsymExpr,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> i32 {
    guarded(|| {
        let e = match require(e, "expr") {
            Ok(e) => e,
            Err(c) => return c,
        };
        write_text(&e.0.to_string(), buf, cap, needed)
    })
}

/// Exact partial derivative with respect to a named variable.
///
/// # Safety
/// Pointer arguments must be valid; `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plastsym_expr_diff(
    e: *const PlastsymExpr,
    var: *const c_char,
    out: *mut *mut PlastsymExpr,
) -> i32 {
    guarded(|| {
        let out = match require_mut(out, "out") {
            Ok(o) => o,
            Err(c) => return c,
        };
        let e = match require(e, "expr") {
            Ok(e) => e,
            Err(c) => return c,
        };
        let var = match unsafe { cstr(var, "var") } {
            Ok(v) => v,
            Err(c) => return c,
        };
        let d = e.0.diff(&plastsym::symexpr::Sym::new(var));
        *out = Box::into_raw(Box::new(PlastsymExpr(d)));
        PLASTSYM_OK
    })
}

/// Evaluate an expression at the bindings held by `env`.
///
/// # Safety
/// Pointer arguments must be valid; `e` and `env` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn plastsym_expr_eval(
    e: *const PlastsymExpr,
    env: *const PlastsymEnv,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let out = match require_mut(out, "out") {
            Ok(o) => o,
            Err(c) => return c,
        };
        let e = match require(e, "expr") {
            Ok(e) => e,
            Err(c) => return c,
        };
        let env = match require(env, "env") {
            Ok(v) => v,
            Err(c) => return c,
        };
        match e.0.eval(&env.0) {
            Ok(v) => {
                *out = v;
                PLASTSYM_OK
            }
            Err(err) => eval_error(err),
        }
    })
}

/// Probabilistic zero test over the default sampling box.
/// `*out_is_zero` receives 1 when no sampled point refutes the identity.
///
/// # Safety
/// Pointer arguments must be valid; `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plastsym_expr_is_zero(
    e: *const PlastsymExpr,
    seed: u64,
    trials: u32,
    tol: f64,
    out_is_zero: *mut i32,
) -> i32 {
    guarded(|| {
        let out = match require_mut(out_is_zero, "out_is_zero") {
            Ok(o) => o,
            Err(c) => return c,
        };
        let e = match require(e, "expr") {
            Ok(e) => e,
            Err(c) => return c,
        };
        if trials == 0 || !tol.is_finite() || tol <= 0.0 {
            return fail(
                PLASTSYM_ERR_INVALID_ARGUMENT,
                "trials must be positive and tol a positive finite number",
            );
        }
        let opts = ZeroOpts {
            trials: trials as usize,
            tol,
            seed,
            ..Default::default()
        };
        match is_zero(&e.0, &opts) {
            Ok(t) => {
                *out = i32::from(t.is_zero);
                PLASTSYM_OK
            }
            Err(err) => fail(PLASTSYM_ERR_DOMAIN, err.to_string()),
        }
    })
}

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

/// Create an empty evaluation environment.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn plastsym_env_new(out: *mut *mut PlastsymEnv) -> i32 {
    guarded(|| {
        let out = match require_mut(out, "out") {
            Ok(o) => o,
            Err(c) => return c,
        };
        *out = Box::into_raw(Box::new(PlastsymEnv(Env::new())));
        PLASTSYM_OK
    })
}

/// Destroy an environment handle (NULL is a no-op).
///
/// # Safety
/// `env` must be NULL or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn plastsym_env_free(env: *mut PlastsymEnv) {
    if !env.is_null() {
        drop(unsafe { Box::from_raw(env) });
    }
}

/// Bind a variable (t, x, y, u, v, sigma, theta, or a reduction variable).
///
/// # Safety
/// Pointer arguments must be valid; `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plastsym_env_set_var(
    env: *mut PlastsymEnv,
    name: *const c_char,
    value: f64,
) -> i32 {
    guarded(|| {
        let env = match require_mut(env, "env") {
            Ok(v) => v,
            Err(c) => return c,
        };
        let name = match unsafe { cstr(name, "name") } {
            Ok(n) => n,
            Err(c) => return c,
        };
        env.0.set_var(name, value);
        PLASTSYM_OK
    })
}

/// Bind a parameter (rho, kappa1, a1, b2, …).
///
/// # Safety
/// Pointer arguments must be valid; `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plastsym_env_set_param(
    env: *mut PlastsymEnv,
    name: *const c_char,
    value: f64,
) -> i32 {
    guarded(|| {
        let env = match require_mut(env, "env") {
            Ok(v) => v,
            Err(c) => return c,
        };
        let name = match unsafe { cstr(name, "name") } {
            Ok(n) => n,
            Err(c) => return c,
        };
        env.0.set_param(name, value);
        PLASTSYM_OK
    })
}

// ---------------------------------------------------------------------------
// Verification drivers
// ---------------------------------------------------------------------------

/// Verify the commutation table on polynomial slots 1, t, …, t^degree.
/// Writes the number of bracket pairs checked and how many failed.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn plastsym_check_table(
    degree: u32,
    trials: u32,
    seed: u64,
    tol: f64,
    out_checked: *mut u32,
    out_failed: *mut u32,
) -> i32 {
    guarded(|| {
        let out_checked = match require_mut(out_checked, "out_checked") {
            Ok(o) => o,
            Err(c) => return c,
        };
        let out_failed = match require_mut(out_failed, "out_failed") {
            Ok(o) => o,
            Err(c) => return c,
        };
        if trials == 0 || !tol.is_finite() || tol <= 0.0 {
            return fail(
                PLASTSYM_ERR_INVALID_ARGUMENT,
                "trials must be positive and tol a positive finite number",
            );
        }
        let slots: Vec<Expr> = (0..=degree as i64)
            .map(|k| Expr::pow(plastsym::symexpr::var("t"), plastsym::symexpr::rat(k, 1)))
            .collect();
        let opts = ZeroOpts {
            trials: trials as usize,
            tol,
            seed,
            ..Default::default()
        };
        let report = check_table(&slots, &opts);
        *out_checked = report.checks.len() as u32;
        *out_failed = report.checks.iter().filter(|c| !c.pass).count() as u32;
        if let Some(first) = report.checks.iter().find(|c| !c.pass) {
            note(format!(
                "{} ≠ {}: {}",
                first.lhs,
                first.expected,
                first.witness.as_deref().unwrap_or("no witness")
            ));
        }
        PLASTSYM_OK
    })
}

/// Body-force selector for [`plastsym_check_symmetry`].
pub const PLASTSYM_FORCE_NONE: i32 = 0;
pub const PLASTSYM_FORCE_MONOGENIC: i32 = 1;
pub const PLASTSYM_FORCE_FRICTION: i32 = 2;
pub const PLASTSYM_FORCE_FRICTION_SPIRAL: i32 = 3;

/// Run the infinitesimal symmetry criterion for one generator.
///
/// `generator` uses the text syntax (`P0`, `D + 2*L`, `X[t^2]`, …) plus `K`
/// for the twist built from `kappa[0..3]`. `vpot` (needed only for the
/// monogenic force) and `h1`/`h2` (friction profiles in the slip variable s)
/// may be NULL where unused; `kappa` must point to five doubles for the
/// friction forces and may be NULL otherwise. Writes how many of the four
/// governing equations were checked (always 4) and how many failed.
///
/// # Safety
/// Pointer arguments must be valid per the rules above.
#[no_mangle]
pub unsafe extern "C" fn plastsym_check_symmetry(
    generator: *const c_char,
    force_kind: i32,
    vpot: *const c_char,
    h1: *const c_char,
    h2: *const c_char,
    kappa: *const f64,
    trials: u32,
    seed: u64,
    tol: f64,
    out_checked: *mut u32,
    out_failed: *mut u32,
) -> i32 {
    guarded(|| {
        let out_checked = match require_mut(out_checked, "out_checked") {
            Ok(o) => o,
            Err(c) => return c,
        };
        let out_failed = match require_mut(out_failed, "out_failed") {
            Ok(o) => o,
            Err(c) => return c,
        };
        if trials == 0 || !tol.is_finite() || tol <= 0.0 {
            return fail(
                PLASTSYM_ERR_INVALID_ARGUMENT,
                "trials must be positive and tol a positive finite number",
            );
        }
        let gen_text = match unsafe { cstr(generator, "generator") } {
            Ok(g) => g,
            Err(c) => return c,
        };
        let k: [f64; 5] = if kappa.is_null() {
            [0.0, 1.0, 1.0, 0.0, 0.0]
        } else {
            unsafe { std::slice::from_raw_parts(kappa, 5) }
                .try_into()
                .unwrap()
        };

        let opt_text = |ptr: *const c_char, what: &str| -> Result<Option<&str>, i32> {
            if ptr.is_null() {
                Ok(None)
            } else {
                unsafe { cstr(ptr, what) }.map(Some)
            }
        };
        let vpot = match opt_text(vpot, "vpot") {
            Ok(v) => v,
            Err(c) => return c,
        };
        let h1 = match opt_text(h1, "h1") {
            Ok(v) => v.unwrap_or("s"),
            Err(c) => return c,
        };
        let h2 = match opt_text(h2, "h2") {
            Ok(v) => v.unwrap_or("1"),
            Err(c) => return c,
        };

        let parse_expr = |text: &str, what: &str| -> Result<Expr, i32> {
            parse(text).map_err(|e| fail(PLASTSYM_ERR_PARSE, format!("{what}: {e}")))
        };
        let num = plastsym::symexpr::num_f64;
        let force = match force_kind {
            PLASTSYM_FORCE_NONE => Force::zero(),
            PLASTSYM_FORCE_MONOGENIC => {
                let Some(v) = vpot else {
                    return fail(
                        PLASTSYM_ERR_INVALID_ARGUMENT,
                        "monogenic force requires vpot",
                    );
                };
                match parse_expr(v, "vpot") {
                    Ok(v) => Force::monogenic(&v),
                    Err(c) => return c,
                }
            }
            PLASTSYM_FORCE_FRICTION | PLASTSYM_FORCE_FRICTION_SPIRAL => {
                let h1 = match parse_expr(h1, "h1") {
                    Ok(e) => e,
                    Err(c) => return c,
                };
                let h2 = match parse_expr(h2, "h2") {
                    Ok(e) => e,
                    Err(c) => return c,
                };
                if force_kind == PLASTSYM_FORCE_FRICTION {
                    Force::friction(&h1, &h2, num(k[1]), num(k[2]))
                } else {
                    Force::friction_spiral(
                        &h1,
                        &h2,
                        num(k[0]),
                        num(k[1]),
                        num(k[2]),
                        num(k[3]),
                        num(k[4]),
                    )
                }
            }
            other => {
                return fail(
                    PLASTSYM_ERR_INVALID_ARGUMENT,
                    format!("unknown force kind {other}"),
                )
            }
        };

        let vf = if gen_text.trim() == "K" {
            gen::k_twist(num(k[0]), num(k[1]), num(k[2]))
        } else {
            match parse_generator(gen_text) {
                Ok(vf) => vf,
                Err(e) => return fail(PLASTSYM_ERR_PARSE, format!("generator: {e}")),
            }
        };

        let opts = ZeroOpts {
            trials: trials as usize,
            tol,
            seed,
            ..symmetry_opts(trials as usize)
        };
        let report = check_symmetry(&vf, &system(force), &opts);
        *out_checked = report.checks.len() as u32;
        *out_failed = report.checks.iter().filter(|c| !c.pass).count() as u32;
        if let Some(first) = report.checks.iter().find(|c| !c.pass) {
            note(format!(
                "{}: {}",
                first.label,
                first.witness.as_deref().unwrap_or("no witness")
            ));
        }
        PLASTSYM_OK
    })
}

// ---------------------------------------------------------------------------
// Exact solutions
// ---------------------------------------------------------------------------

/// Comma-joined names of the shipped solution families.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn plastsym_family_names(
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> i32 {
    guarded(|| write_text(&family_names().join(","), buf, cap, needed))
}

/// Certify residuals of one family at `points` sampled in-box points.
/// `out_max_abs` receives the four per-equation maxima; `out_pass` is 1 iff
/// every point evaluated, none was skipped, and the maxima sit inside
/// (`tol`, `tol`, `tol`, `tol_incompressibility`).
///
/// # Safety
/// Pointer arguments must be valid; `out_max_abs` must point to four doubles.
#[no_mangle]
pub unsafe extern "C" fn plastsym_solution_residual(
    family: *const c_char,
    points: u32,
    seed: u64,
    tol: f64,
    tol_incompressibility: f64,
    out_max_abs: *mut f64,
    out_evaluated: *mut u32,
    out_skipped: *mut u32,
    out_pass: *mut i32,
) -> i32 {
    guarded(|| {
        let out_evaluated = match require_mut(out_evaluated, "out_evaluated") {
            Ok(o) => o,
            Err(c) => return c,
        };
        let out_skipped = match require_mut(out_skipped, "out_skipped") {
            Ok(o) => o,
            Err(c) => return c,
        };
        let out_pass = match require_mut(out_pass, "out_pass") {
            Ok(o) => o,
            Err(c) => return c,
        };
        if out_max_abs.is_null() {
            return fail(PLASTSYM_ERR_NULL_ARGUMENT, "out_max_abs is NULL");
        }
        let name = match unsafe { cstr(family, "family") } {
            Ok(n) => n,
            Err(c) => return c,
        };
        if points == 0 || !tol.is_finite() || tol <= 0.0 {
            return fail(
                PLASTSYM_ERR_INVALID_ARGUMENT,
                "points must be positive and tol a positive finite number",
            );
        }
        let Some(fam) = by_name(name) else {
            return fail(
                PLASTSYM_ERR_UNKNOWN_NAME,
                format!(
                    "unknown family `{name}` (available: {})",
                    family_names().join(", ")
                ),
            );
        };
        let env = fam.default_env();
        let sampled = sample_points(&fam, points as usize, seed);
        match residual(&fam, &env, &sampled, tol, tol_incompressibility) {
            Ok(rep) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(rep.max_abs.as_ptr(), out_max_abs, 4);
                }
                *out_evaluated = rep.evaluated as u32;
                *out_skipped = rep.skipped as u32;
                *out_pass = i32::from(rep.pass());
                PLASTSYM_OK
            }
            Err(e) => eval_error(e),
        }
    })
}

/// Velocity flow field of a family at time `t` over `grid` ("min:max:n"),
/// rendered as CSV under the `(buf, cap, needed)` protocol.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn plastsym_flowfield_csv(
    family: *const c_char,
    t: f64,
    grid: *const c_char,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> i32 {
    guarded(|| {
        let name = match unsafe { cstr(family, "family") } {
            Ok(n) => n,
            Err(c) => return c,
        };
        let grid_text = match unsafe { cstr(grid, "grid") } {
            Ok(g) => g,
            Err(c) => return c,
        };
        let Some(fam) = by_name(name) else {
            return fail(
                PLASTSYM_ERR_UNKNOWN_NAME,
                format!(
                    "unknown family `{name}` (available: {})",
                    family_names().join(", ")
                ),
            );
        };
        let spec = match GridSpec::parse(grid_text) {
            Ok(s) => s,
            Err(e) => return fail(PLASTSYM_ERR_INVALID_ARGUMENT, format!("grid: {e}")),
        };
        if !t.is_finite() {
            return fail(PLASTSYM_ERR_INVALID_ARGUMENT, "t must be finite");
        }
        match flow_field(&fam, &fam.default_env(), t, &spec) {
            Ok(field) => write_text(&to_csv(&field), buf, cap, needed),
            Err(e) => eval_error(e),
        }
    })
}
