//! C ABI over `graphon-ldp`.
//!
//! Every function returns an `int32_t` status: `GL_OK` or one of the error
//! codes below, which match the exit codes of the command-line tool. The
//! message of the last failure on the calling thread is available from
//! [`gl_last_error`]. Graphons cross the boundary as opaque `GlGraphon`
//! handles owned by the caller and released with [`gl_graphon_free`].
//! Strings returned by the library are released with [`gl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use graphon_ldp::enumerate::{count_graphs, verify_deg_partition_identity};
use graphon_ldp::graphon::{cut_metric_upper, cut_norm_distance, lp_distance, LpNorm, SearchMode};
use graphon_ldp::{
    entropy_he, erdos_gallai, limit_graphon, relative_entropy_i, solve_beta, subgraph_density, BetaOptions,
    DegreeFunction, DegreeSequence, Error, StepGraphon, SubgraphPattern,
};

pub const GL_OK: i32 = 0;
pub const GL_ERR_INTERNAL: i32 = 1;
pub const GL_ERR_NULL_POINTER: i32 = 2;
pub const GL_ERR_INVALID_INPUT: i32 = 3;
pub const GL_ERR_PARSE: i32 = 4;
pub const GL_ERR_IO: i32 = 5;
pub const GL_ERR_DOMAIN: i32 = 6;
pub const GL_ERR_NUMERICAL: i32 = 7;
pub const GL_ERR_CAPACITY: i32 = 8;
pub const GL_ERR_INFEASIBLE: i32 = 9;
pub const GL_ERR_SAMPLING: i32 = 10;
pub const GL_ERR_PANIC: i32 = 11;

/// Opaque step graphon.
pub struct GlGraphon(StepGraphon);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Outcome + UnwindSafe>(f: F) -> i32 {
    match catch_unwind(f) {
        Ok(Ok(())) => GL_OK,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            e.exit_code()
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            GL_ERR_NULL_POINTER
        }
        Err(_) => {
            set_error("panic inside graphon-ldp".into());
            GL_ERR_PANIC
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn graphon<'a>(g: *const GlGraphon, what: &'static str) -> Result<&'a StepGraphon, Failure> {
    g.as_ref().map(|h| &h.0).ok_or(Failure::Null(what))
}

unsafe fn text<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure::Lib(Error::Parse(format!("{what} is not UTF-8"))))
}

unsafe fn write<T>(out: *mut T, v: T, what: &'static str) -> Outcome {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn degrees(d: *const u32, n: usize) -> Result<DegreeSequence, Failure> {
    let d = slice(d, n, "degrees")?;
    Ok(DegreeSequence::new(d.iter().map(|&x| x as usize).collect())?)
}

fn handle(g: StepGraphon) -> *mut GlGraphon {
    Box::into_raw(Box::new(GlGraphon(g)))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graphon from `k` block weights and a row-major `k*k` value table.
///
/// # Safety
/// `weights` and `values` must point to `k` and `k*k` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_graphon_new(k: usize, weights: *const f64, values: *const f64, out: *mut *mut GlGraphon) -> i32 {
    guard(|| {
        let w = slice(weights, k, "weights")?.to_vec();
        let v = slice(values, k * k, "values")?.to_vec();
        write(out, handle(StepGraphon::from_flat(w, v)?), "out")
    })
}

/// Parses `{"block_weights": [...], "values": [[...], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gl_graphon_from_json(json: *const c_char, out: *mut *mut GlGraphon) -> i32 {
    guard(|| {
        let g: StepGraphon = serde_json::from_str(text(json, "json")?).map_err(Error::from)?;
        write(out, handle(g), "out")
    })
}

/// Serializes a graphon; free the string with `gl_string_free`.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_graphon_to_json(g: *const GlGraphon, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let s = graphon_ldp::io::to_json(graphon(g, "graphon")?)?;
        write(out, CString::new(s).expect("JSON has no NUL").into_raw(), "out")
    })
}

/// # Safety
/// `g` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn gl_graphon_free(g: *mut GlGraphon) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn gl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of blocks, 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_graphon_block_count(g: *const GlGraphon) -> usize {
    g.as_ref().map_or(0, |h| h.0.block_count())
}

/// Exact cut norm of `a - b`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_cut_norm_distance(a: *const GlGraphon, b: *const GlGraphon, out: *mut f64) -> i32 {
    guard(|| write(out, cut_norm_distance(graphon(a, "a")?, graphon(b, "b")?)?, "out"))
}

/// Upper bound on the cut metric over block relabelings; `exact` nonzero
/// examines every permutation (at most 8 aligned blocks).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_cut_metric_upper(a: *const GlGraphon, b: *const GlGraphon, exact: i32, out: *mut f64) -> i32 {
    guard(|| {
        let mode = if exact != 0 { SearchMode::Exact } else { SearchMode::Anneal };
        write(out, cut_metric_upper(graphon(a, "a")?, graphon(b, "b")?, mode)?.value, "out")
    })
}

/// L1 (`p == 1`) or L2 (`p == 2`) distance.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_lp_distance(a: *const GlGraphon, b: *const GlGraphon, p: i32, out: *mut f64) -> i32 {
    guard(|| {
        let norm = match p {
            1 => LpNorm::L1,
            2 => LpNorm::L2,
            _ => return Err(Error::InvalidArgument(format!("p must be 1 or 2, got {p}")).into()),
        };
        write(out, lp_distance(graphon(a, "a")?, graphon(b, "b")?, norm)?, "out")
    })
}

/// `I_{W0}(W)`; infinite values are written as `INFINITY`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_relative_entropy(w: *const GlGraphon, w0: *const GlGraphon, out: *mut f64) -> i32 {
    guard(|| write(out, relative_entropy_i(graphon(w, "w")?, graphon(w0, "w0")?)?, "out"))
}

/// # Safety
/// `w` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_entropy_he(w: *const GlGraphon, out: *mut f64) -> i32 {
    guard(|| write(out, entropy_he(graphon(w, "w")?), "out"))
}

/// Homomorphism density of a pattern such as `triangle`, `cycle4` or
/// `3:1-2,2-3`.
///
/// # Safety
/// `pattern` must be NUL-terminated, `w` live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_subgraph_density(pattern: *const c_char, w: *const GlGraphon, out: *mut f64) -> i32 {
    guard(|| {
        let h = SubgraphPattern::parse(text(pattern, "pattern")?)?;
        write(out, subgraph_density(&h, graphon(w, "w")?)?, "out")
    })
}

/// Writes 1 to `out` when the `n` degrees are graphical, else 0.
///
/// # Safety
/// `degrees` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_erdos_gallai(degrees_ptr: *const u32, n: usize, out: *mut i32) -> i32 {
    guard(|| write(out, erdos_gallai(&degrees(degrees_ptr, n)?) as i32, "out"))
}

/// β-model fit; writes `n` values to `beta_out`.
///
/// # Safety
/// `degrees` must point to `n` values and `beta_out` to room for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_solve_beta(degrees_ptr: *const u32, n: usize, tol: f64, max_iter: usize, beta_out: *mut f64) -> i32 {
    guard(|| {
        let b = solve_beta(&degrees(degrees_ptr, n)?, &BetaOptions { tol, max_iter })?;
        if beta_out.is_null() {
            return Err(Failure::Null("beta_out"));
        }
        ptr::copy_nonoverlapping(b.beta.as_ptr(), beta_out, n);
        Ok(())
    })
}

/// Exact number of labeled graphs with the given degrees (n at most 16);
/// `GL_ERR_CAPACITY` when it does not fit in 64 bits.
///
/// # Safety
/// `degrees` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_count_graphs(degrees_ptr: *const u32, n: usize, out: *mut u64) -> i32 {
    guard(|| {
        let c = count_graphs(&degrees(degrees_ptr, n)?)?;
        let c = u64::try_from(c).map_err(|_| Error::TooLarge { n, cap: 64 })?;
        write(out, c, "out")
    })
}

/// Relative residual of the finite-n identity between the β-model and the
/// uniform law on graphs with degrees `d`.
///
/// # Safety
/// `degrees` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_verify_identity(degrees_ptr: *const u32, n: usize, out: *mut f64) -> i32 {
    guard(|| write(out, verify_deg_partition_identity(&degrees(degrees_ptr, n)?)?.relative_residual, "out"))
}

/// `W_D` on `k` equal blocks for the step degree function with `pieces`
/// values on the intervals between `pieces + 1` breakpoints from 0 to 1.
///
/// # Safety
/// `breakpoints` and `values` must point to `pieces + 1` and `pieces` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_limit_graphon(
    breakpoints: *const f64,
    values: *const f64,
    pieces: usize,
    k: usize,
    out: *mut *mut GlGraphon,
) -> i32 {
    guard(|| {
        let b = slice(breakpoints, pieces + 1, "breakpoints")?.to_vec();
        let v = slice(values, pieces, "values")?.to_vec();
        let d = DegreeFunction::new(b, v)?;
        write(out, handle(limit_graphon(&d, k, &BetaOptions::default())?.graphon), "out")
    })
}
