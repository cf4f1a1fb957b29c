//! C interface to `opspline`.
//!
//! Objects are exposed as opaque handles created by `ops_*_new`/`ops_fit_*`
//! functions and released with the matching `ops_*_free`. Every fallible
//! function returns an [`OpsStatus`]; on failure a description is available
//! from [`ops_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use opspline::bi_offset::{fit_bi_offset_refined, fit_bi_offset_unrefined, mse_between};
use opspline::curve::{uniform_points, Curve};
use opspline::datasets::{generate_test_dataset, NoiseModel, TestFunction};
use opspline::geometry::{detect_cusps, Side};
use opspline::op_spline::{default_p, default_q, fit_op_spline, OffsetSpec};
use opspline::output::export_report;
use opspline::pipeline::{run_pipeline, ExperimentReport, ModelKind, PipelineConfig};
use opspline::refinement::refine_tangents;
use opspline::tp_spline::{default_basis_size, fit_tp_spline, select_parameters, GcvSearch};
use opspline::{Dataset, Error, KnotVector, SplineModel};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    SingularMatrix = 4,
    RankDeficient = 5,
    SingularKkt = 6,
    DegenerateGcv = 7,
    CuspSingularity = 8,
    UnknownTestFunction = 9,
    Io = 10,
    Parse = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Offset side.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpsSide {
    Interior = 0,
    Exterior = 1,
}

impl From<OpsSide> for Side {
    fn from(s: OpsSide) -> Self {
        match s {
            OpsSide::Interior => Side::Interior,
            OpsSide::Exterior => Side::Exterior,
        }
    }
}

/// Samples `(x_i, y_i)` with strictly increasing abscissae.
pub struct OpsDataset(Dataset);

/// A cubic spline on a uniform knot vector.
pub struct OpsSpline(SplineModel);

/// Result of a full experiment run.
pub struct OpsReport(ExperimentReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OpsStatus {
    match e {
        Error::Domain(_) => OpsStatus::Domain,
        Error::Dimension(_) | Error::InvalidInput(_) | Error::ZeroRadius => OpsStatus::InvalidInput,
        Error::SingularMatrix(_) => OpsStatus::SingularMatrix,
        Error::RankDeficientConstraints { .. } => OpsStatus::RankDeficient,
        Error::SingularKkt => OpsStatus::SingularKkt,
        Error::DegenerateGcv(_) | Error::AllDegenerate => OpsStatus::DegenerateGcv,
        Error::CuspSingularity(_) => OpsStatus::CuspSingularity,
        Error::UnknownTestFunction(_) => OpsStatus::UnknownTestFunction,
        Error::Io { .. } => OpsStatus::Io,
        Error::Parse(_) => OpsStatus::Parse,
    }
}

enum Failure {
    Lib(Error),
    Status(OpsStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(OpsStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> OpsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            OpsStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            OpsStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(OpsStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn ops_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ops_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies `len` samples into a new dataset.
///
/// # Safety
/// `xs` and `ys` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_dataset_new(
    xs: *const f64,
    ys: *const f64,
    len: usize,
    out: *mut *mut OpsDataset,
) -> OpsStatus {
    guard(|| {
        let d = Dataset::new(slice(xs, len, "xs")?.to_vec(), slice(ys, len, "ys")?.to_vec())?;
        put(out, Box::into_raw(Box::new(OpsDataset(d))), "out")
    })
}

/// Samples a builtin test function (`"p1"`, `"p2"`, `"line"`) at `m` uniform
/// points with absolute Gaussian noise of deviation `sigma`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_dataset_builtin(
    name: *const c_char,
    m: usize,
    sigma: f64,
    seed: u64,
    out: *mut *mut OpsDataset,
) -> OpsStatus {
    guard(|| {
        let f: TestFunction = text(name, "name")?.parse()?;
        let d = generate_test_dataset(f, m, NoiseModel::absolute(sigma), seed)?;
        put(out, Box::into_raw(Box::new(OpsDataset(d))), "out")
    })
}

/// Number of samples.
///
/// # Safety
/// `d` must be a live dataset handle or null.
#[no_mangle]
pub unsafe extern "C" fn ops_dataset_len(d: *const OpsDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `d` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ops_dataset_free(d: *mut OpsDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Selects `(mu, lambda)` by GCV and fits the penalized generator spline on a
/// uniform basis of dimension `n` (0 picks a default from the sample count).
///
/// # Safety
/// `d` must be a live dataset; `out` must be writable; `mu` and `lambda` may be null.
#[no_mangle]
pub unsafe extern "C" fn ops_fit_tp(
    d: *const OpsDataset,
    n: usize,
    out: *mut *mut OpsSpline,
    mu: *mut f64,
    lambda: *mut f64,
) -> OpsStatus {
    guard(|| {
        let d = &as_ref(d, "dataset")?.0;
        let n = if n == 0 { default_basis_size(d.len()) } else { n };
        let (a, b) = d.domain();
        let kv = KnotVector::uniform(a, b, n)?;
        let sel = select_parameters(d, &kv, &GcvSearch::default())?;
        let g = fit_tp_spline(d, &kv, sel.params)?;
        if !mu.is_null() {
            mu.write(sel.params.mu);
        }
        if !lambda.is_null() {
            lambda.write(sel.params.lambda);
        }
        put(out, Box::into_raw(Box::new(OpsSpline(g))), "out")
    })
}

/// Value (`deriv = 0`) or derivative of order `deriv <= 2` at `x`.
///
/// # Safety
/// `s` must be a live spline; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_spline_eval(s: *const OpsSpline, x: f64, deriv: u32, out: *mut f64) -> OpsStatus {
    guard(|| {
        let v = as_ref(s, "spline")?.0.eval(x, deriv as usize)?;
        put(out, v, "out")
    })
}

/// Domain `[a, b]` of the spline.
///
/// # Safety
/// `s` must be a live spline; `a` and `b` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_spline_domain(s: *const OpsSpline, a: *mut f64, b: *mut f64) -> OpsStatus {
    guard(|| {
        let (lo, hi) = as_ref(s, "spline")?.0.domain();
        put(a, lo, "a")?;
        put(b, hi, "b")
    })
}

/// Copies the coefficients into `buf` of capacity `cap` and stores their
/// count in `len`. With too small a buffer only `len` is written and
/// `BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `s` must be a live spline; `buf` must hold `cap` doubles; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_spline_coefficients(
    s: *const OpsSpline,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> OpsStatus {
    guard(|| {
        let c = as_ref(s, "spline")?.0.coeffs();
        put(len, c.len(), "len")?;
        if cap < c.len() {
            return Err(Failure::Status(
                OpsStatus::BufferTooSmall,
                format!("need {} coefficients, buffer holds {cap}", c.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(c.as_ptr(), buf, c.len());
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ops_spline_free(s: *mut OpsSpline) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

unsafe fn spec_for(g: &SplineModel, tau: f64, side: OpsSide, q: usize, p: usize) -> Result<OffsetSpec, Failure> {
    let n = g.knots().dim();
    let q = if q == 0 { default_q(n) } else { q };
    let p = if p == 0 { default_p(n) } else { p };
    Ok(OffsetSpec::new(tau, side.into(), q, p)?)
}

/// Offset spline of `g` at distance `tau > 0` on `side` with `q` constraint
/// and `p` refinement abscissae (0 picks the defaults).
///
/// # Safety
/// `g` must be a live spline; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_offset_spline(
    g: *const OpsSpline,
    tau: f64,
    side: OpsSide,
    q: usize,
    p: usize,
    out: *mut *mut OpsSpline,
) -> OpsStatus {
    guard(|| {
        let g = &as_ref(g, "generator")?.0;
        let spec = spec_for(g, tau, side, q, p)?;
        let f = fit_op_spline(g, &spec, g.knots())?;
        put(out, Box::into_raw(Box::new(OpsSpline(f))), "out")
    })
}

/// Reconstructs `g` from its offset spline `f` (built with the same `tau`,
/// `side`, `q`, `p`), with or without tangent refinement.
///
/// # Safety
/// `g` and `f` must be live splines; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_bi_offset(
    g: *const OpsSpline,
    f: *const OpsSpline,
    tau: f64,
    side: OpsSide,
    q: usize,
    p: usize,
    refined: bool,
    out: *mut *mut OpsSpline,
) -> OpsStatus {
    guard(|| {
        let g = &as_ref(g, "generator")?.0;
        let f = &as_ref(f, "offset")?.0;
        let spec = spec_for(g, tau, side, q, p)?;
        let r = refine_tangents(f, g, &spec)?;
        let h = if refined {
            fit_bi_offset_refined(g, &r, &spec, g.knots())?
        } else {
            fit_bi_offset_unrefined(g, &r, &spec, g.knots())?
        };
        put(out, Box::into_raw(Box::new(OpsSpline(h.model))), "out")
    })
}

/// Number of cusps of the offset of `g` at signed distance `signed_tau`.
///
/// # Safety
/// `g` must be a live spline; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_cusp_count(g: *const OpsSpline, signed_tau: f64, count: *mut usize) -> OpsStatus {
    guard(|| {
        let g = &as_ref(g, "spline")?.0;
        put(count, detect_cusps(g, signed_tau, 512)?.len(), "count")
    })
}

/// Mean squared difference of two splines at `samples` uniform points over
/// the domain of `a`.
///
/// # Safety
/// `a` and `b` must be live splines; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_mse(a: *const OpsSpline, b: *const OpsSpline, samples: usize, out: *mut f64) -> OpsStatus {
    guard(|| {
        let a = &as_ref(a, "a")?.0;
        let b = &as_ref(b, "b")?.0;
        let (lo, hi) = a.domain();
        put(out, mse_between(a, b, &uniform_points(lo, hi, samples.max(1)))?, "out")
    })
}

/// Runs the full experiment described by a TOML configuration (null or
/// empty for the defaults).
///
/// # Safety
/// `config_toml` must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_pipeline_run(config_toml: *const c_char, out: *mut *mut OpsReport) -> OpsStatus {
    guard(|| {
        let cfg = if config_toml.is_null() {
            PipelineConfig::default()
        } else {
            PipelineConfig::from_toml(text(config_toml, "config")?)?
        };
        let report = run_pipeline(&cfg)?;
        put(out, Box::into_raw(Box::new(OpsReport(report))), "out")
    })
}

/// Number of `(tau, side)` cells.
///
/// # Safety
/// `r` must be a live report handle or null.
#[no_mangle]
pub unsafe extern "C" fn ops_report_cells(r: *const OpsReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.cells.len())
}

/// Model-relative bi-offset MSE of the penalized model in cell `index`.
/// Returns the cell's stage error if it failed.
///
/// # Safety
/// `r` must be a live report; the out pointers must be writable (`tau`, `side` may be null).
#[no_mangle]
pub unsafe extern "C" fn ops_report_cell(
    r: *const OpsReport,
    index: usize,
    refined: bool,
    tau: *mut f64,
    side: *mut OpsSide,
    mse: *mut f64,
) -> OpsStatus {
    guard(|| {
        let report = &as_ref(r, "report")?.0;
        let cell = report.cells.get(index).ok_or_else(|| {
            Failure::Status(
                OpsStatus::InvalidInput,
                format!("cell {index} of {}", report.cells.len()),
            )
        })?;
        if !tau.is_null() {
            tau.write(cell.tau);
        }
        if !side.is_null() {
            side.write(match cell.side {
                Side::Interior => OpsSide::Interior,
                Side::Exterior => OpsSide::Exterior,
            });
        }
        let mc = cell
            .models
            .iter()
            .find(|m| m.model == ModelKind::Tp)
            .or_else(|| cell.models.first())
            .ok_or_else(|| Failure::Status(OpsStatus::InvalidInput, "cell has no models".into()))?;
        let m = mc.outcome.as_ref().map_err(|e| Failure::Lib(e.clone()))?;
        let e = if refined { m.refined_error } else { m.unrefined_error };
        put(mse, e.mse_model, "mse")
    })
}

/// Writes `curves.csv`, `report.csv`, `metrics.csv` and `figure.svg` into `dir`.
///
/// # Safety
/// `r` must be a live report; `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ops_report_write(r: *const OpsReport, dir: *const c_char) -> OpsStatus {
    guard(|| {
        let report = &as_ref(r, "report")?.0;
        export_report(report, Path::new(text(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ops_report_free(r: *mut OpsReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
