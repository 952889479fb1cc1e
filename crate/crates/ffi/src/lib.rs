//! C interface.
//!
//! Samples and estimates are opaque handles created and destroyed through
//! this API. Every fallible call returns a [`VtStatus`]; on failure the
//! message is available from [`vt_last_error`] on the same thread until the
//! next failing call. Strings returned to the caller are released with
//! [`vt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vorotens::cells::MomentMethod;
use vorotens::estimators::{
    estimate_local, estimate_refined, estimate_tensors, reduced_radius_estimate, volume_tensor_hat, SteinerMatrix,
    TensorEstimate, Variant,
};
use vorotens::measures::{
    refined_measure, shell_measure, voronoi_tensor_measure, MeasureValue, RegionOfInterest, SpatialRegion,
};
use vorotens::shapes::{digitize, Lattice, PointSample, ReferenceShape, Window};
use vorotens::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VtStatus {
    Ok = 0,
    InvalidInput = 1,
    DimensionMismatch = 2,
    Precondition = 3,
    Unsupported = 4,
    Numerical = 5,
    Io = 6,
    NullPointer = 7,
    Panic = 8,
}

/// Moment integration backend.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VtMethod {
    Exact = 0,
    MonteCarlo = 1,
}

/// Which measures feed which Steiner system.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VtMode {
    Standard = 0,
    Refined = 1,
    Shell = 2,
    Reduced = 3,
}

/// Estimation options; start from [`vt_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct VtOptions {
    pub r: u32,
    pub s: u32,
    /// Strictly increasing radii; `d + 1` of them in standard and refined
    /// mode, `d` otherwise.
    pub radii: *const f64,
    pub n_radii: usize,
    pub method: VtMethod,
    pub max_degree: u32,
    pub mc_samples: usize,
    pub seed: u64,
    pub mode: VtMode,
    /// Nonzero to accept extra radii and solve in the least-squares sense.
    pub least_squares: u8,
}

/// Opaque point sample.
pub struct VtSample(PointSample);

/// Opaque estimate `Φ̂_k` for the orders `k` of one Steiner system.
pub struct VtEstimate(TensorEstimate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: VtStatus, msg: impl Into<String>) -> VtStatus {
    set_error(msg.into());
    status
}

fn status_of(err: &Error) -> VtStatus {
    match err {
        Error::InvalidInput(_) | Error::Json(_) | Error::Arity { .. } => VtStatus::InvalidInput,
        Error::DimensionMismatch { .. } => VtStatus::DimensionMismatch,
        Error::Precondition(_) => VtStatus::Precondition,
        Error::Unsupported(_) => VtStatus::Unsupported,
        Error::Numerical(_) => VtStatus::Numerical,
        Error::Io(_) => VtStatus::Io,
    }
}

/// Run `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), VtStatus>) -> VtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(VtStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, VtStatus>;
}

impl<T> OrStatus<T> for vorotens::Result<T> {
    fn or_status(self) -> Result<T, VtStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn ref_or_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, VtStatus> {
    p.as_ref()
        .ok_or_else(|| fail(VtStatus::NullPointer, format!("{what} is null")))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, VtStatus> {
    if p.is_null() {
        return Err(fail(VtStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(VtStatus::InvalidInput, format!("{what} is not UTF-8")))
}

/// Message of the last failing call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn vt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Sample from `n` points of dimension `dim` stored row by row in
/// `coords`. Pass `spacing > 0` to tag the points as a subset of the cubic
/// lattice `spacing · Z^dim`, or `0` for an unstructured sample.
///
/// # Safety
/// `coords` must point to `n * dim` readable doubles; `out` must be valid
/// for writing.
#[no_mangle]
pub unsafe extern "C" fn vt_sample_new(
    dim: usize,
    coords: *const f64,
    n: usize,
    spacing: f64,
    out: *mut *mut VtSample,
) -> VtStatus {
    guard(|| {
        if out.is_null() || (coords.is_null() && n > 0) {
            return Err(fail(VtStatus::NullPointer, "null argument"));
        }
        if dim == 0 {
            return Err(fail(VtStatus::InvalidInput, "dimension must be positive"));
        }
        let flat = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(coords, n * dim)
        };
        let points: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let lattice = if spacing > 0.0 {
            Some(Lattice::cubic(spacing, dim).or_status()?)
        } else {
            None
        };
        let sample = PointSample::new(dim, points, lattice).or_status()?;
        *out = Box::into_raw(Box::new(VtSample(sample)));
        Ok(())
    })
}

/// Digitize a reference shape given as JSON on the lattice `a · Z^d`.
///
/// # Safety
/// `shape_json` must be a NUL-terminated string; `out` must be valid for
/// writing.
#[no_mangle]
pub unsafe extern "C" fn vt_sample_digitize(shape_json: *const c_char, a: f64, out: *mut *mut VtSample) -> VtStatus {
    guard(|| {
        let text = str_arg(shape_json, "shape_json")?;
        if out.is_null() {
            return Err(fail(VtStatus::NullPointer, "out is null"));
        }
        let shape = ReferenceShape::from_json(text).or_status()?;
        shape.validate().or_status()?;
        let lattice = Lattice::cubic(a, shape.dim()).or_status()?;
        let sample = digitize(&shape, &lattice, &Window::around(&shape, 2.0 * a)).or_status()?;
        *out = Box::into_raw(Box::new(VtSample(sample)));
        Ok(())
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vt_sample_len(sample: *const VtSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vt_sample_dim(sample: *const VtSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `sample` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vt_sample_free(sample: *mut VtSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Defaults: `r = s = 0`, no radii, exact moments up to degree 4,
/// standard mode.
#[no_mangle]
pub extern "C" fn vt_options_default() -> VtOptions {
    VtOptions {
        r: 0,
        s: 0,
        radii: ptr::null(),
        n_radii: 0,
        method: VtMethod::Exact,
        max_degree: vorotens::cells::DEFAULT_MAX_DEGREE,
        mc_samples: 100_000,
        seed: 0,
        mode: VtMode::Standard,
        least_squares: 0,
    }
}

fn run_estimate(sample: &PointSample, opts: &VtOptions, radii: &[f64]) -> vorotens::Result<TensorEstimate> {
    let d = sample.dim();
    let (r, s) = (opts.r, opts.s);
    let method = match opts.method {
        VtMethod::Exact => MomentMethod::Exact {
            max_degree: opts.max_degree,
        },
        VtMethod::MonteCarlo => MomentMethod::Mc {
            samples: opts.mc_samples,
            seed: opts.seed,
        },
    };
    let variant = match opts.mode {
        VtMode::Standard | VtMode::Refined => Variant::Standard,
        VtMode::Shell => Variant::Shell,
        VtMode::Reduced => Variant::Reduced,
    };
    let matrix = if opts.least_squares != 0 {
        SteinerMatrix::overdetermined(radii, r, s, d, variant)?
    } else {
        SteinerMatrix::new(radii, r, s, d, variant)?
    };
    let all = SpatialRegion::All;
    let measures: Vec<MeasureValue> = radii
        .iter()
        .map(|&rad| match opts.mode {
            VtMode::Standard | VtMode::Reduced => voronoi_tensor_measure(sample, rad, r, s, &all, method),
            VtMode::Refined => refined_measure(sample, rad, r, s, &all, method),
            VtMode::Shell => shell_measure(sample, rad, r, s, &RegionOfInterest::all(), method),
        })
        .collect::<vorotens::Result<_>>()?;
    match opts.mode {
        VtMode::Standard => estimate_tensors(&measures, &matrix),
        VtMode::Refined => {
            let spacing = sample
                .lattice()
                .map(|l| l.spacing)
                .ok_or_else(|| Error::Precondition("refined mode needs a lattice sample".into()))?;
            estimate_refined(&measures, &matrix, spacing)
        }
        VtMode::Shell => estimate_local(&measures, &matrix),
        VtMode::Reduced => reduced_radius_estimate(&measures, &volume_tensor_hat(sample, r)?, &matrix),
    }
}

/// Estimate `Φ_k^{r,s}` over the whole space.
///
/// # Safety
/// `sample` and `options` must be live; `options.radii` must point to
/// `options.n_radii` doubles; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn vt_estimate(
    sample: *const VtSample,
    options: *const VtOptions,
    out: *mut *mut VtEstimate,
) -> VtStatus {
    guard(|| {
        let sample = ref_or_null(sample, "sample")?;
        let opts = ref_or_null(options, "options")?;
        if out.is_null() || (opts.radii.is_null() && opts.n_radii > 0) {
            return Err(fail(VtStatus::NullPointer, "null argument"));
        }
        let radii = if opts.n_radii == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(opts.radii, opts.n_radii)
        };
        let est = run_estimate(&sample.0, opts, radii).or_status()?;
        *out = Box::into_raw(Box::new(VtEstimate(est)));
        Ok(())
    })
}

/// Coefficients of `Φ̂_k` in canonical multi-index order. Writes at most
/// `cap` values to `buf` and the full count to `len`; pass `cap = 0` to
/// query the count.
///
/// # Safety
/// `est` must be live; `buf` must hold `cap` doubles; `len` must be valid
/// for writing.
#[no_mangle]
pub unsafe extern "C" fn vt_estimate_coeffs(
    est: *const VtEstimate,
    k: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> VtStatus {
    guard(|| {
        let est = ref_or_null(est, "estimate")?;
        if len.is_null() || (buf.is_null() && cap > 0) {
            return Err(fail(VtStatus::NullPointer, "null argument"));
        }
        let t = est
            .0
            .get(k)
            .ok_or_else(|| fail(VtStatus::InvalidInput, format!("no estimate for k = {k}")))?;
        let c = t.coeffs();
        *len = c.len();
        let n = c.len().min(cap);
        if n > 0 {
            std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&c[..n]);
        }
        Ok(())
    })
}

/// Condition number of the Steiner matrix, or NaN for a null handle.
///
/// # Safety
/// `est` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vt_estimate_condition(est: *const VtEstimate) -> f64 {
    est.as_ref().map_or(f64::NAN, |e| e.0.condition)
}

/// The estimate as a JSON string (free with [`vt_string_free`]), or null on
/// failure.
///
/// # Safety
/// `est` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vt_estimate_to_json(est: *const VtEstimate) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        let est = ref_or_null(est, "estimate")?;
        let text = serde_json::to_string(&est.0).map_err(|e| fail(VtStatus::InvalidInput, e.to_string()))?;
        out = CString::new(text)
            .map_err(|_| fail(VtStatus::InvalidInput, "interior NUL"))?
            .into_raw();
        Ok(())
    });
    out
}

/// # Safety
/// `est` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vt_estimate_free(est: *mut VtEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
