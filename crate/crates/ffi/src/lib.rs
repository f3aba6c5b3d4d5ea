//! C ABI over `fqc-core`.
//!
//! Objects cross the boundary as opaque handles created by `fqc_*_new`-style
//! constructors and released with the matching `*_free`. Every fallible call
//! returns an [`FqcStatus`]; on failure the message is available from
//! [`fqc_last_error`] on the same thread until the next failing call.
//! Strings returned through `char **` out-parameters are owned by the caller
//! and released with [`fqc_string_free`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fqc_core::cutproject::{fibonacci_scheme, model_measure, predicted_spectrum, SpectrumOptions, Window, WindowFunction};
use fqc_core::diffraction::{diffraction_report, AutocorrelationOptions, DiffractionOptions, PeakOptions, Threshold};
use fqc_core::geometry::{classify, min_separation, BoxRegion, PointSet, DEFAULT_DEDUP_TOL};
use fqc_core::io::to_json;
use fqc_core::measures::{ft_point, DiscreteMeasure, FrequencyGrid};
use fqc_core::structure::{recover_comb, RecoveryOptions, RecoveryVerdict};
use fqc_core::Error;
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FqcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A size, enumeration, aliasing or budget guard refused the request.
    Guard = 3,
    Parse = 4,
    Io = 5,
    /// Internal panic; the library state is unaffected but the call failed.
    Panic = 6,
}

/// Finite point set.
pub struct FqcPointSet(PointSet);

/// Finite complex-weighted discrete measure.
pub struct FqcMeasure(DiscreteMeasure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FqcStatus {
    match e {
        Error::EnumerationCap { .. }
        | Error::GridCap { .. }
        | Error::Aliasing { .. }
        | Error::Budget { .. }
        | Error::SupportMismatch { .. }
        | Error::NonDecaying
        | Error::ImaginaryLeak { .. } => FqcStatus::Guard,
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) => FqcStatus::Parse,
        Error::Io(_) => FqcStatus::Io,
        _ => FqcStatus::InvalidArgument,
    }
}

enum Failure {
    Null,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status and the last-error message.
fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> FqcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FqcStatus::Ok,
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument".into());
            FqcStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FqcStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null);
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::Parse("string argument is not UTF-8".into())))
}

fn give_string(s: String, dst: &mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::Lib(Error::Parse("interior nul in output".into())))?;
    *dst = c.into_raw();
    Ok(())
}

unsafe fn region(dim: usize, lo: *const f64, hi: *const f64) -> Result<BoxRegion, Failure> {
    Ok(BoxRegion::new(slice(lo, dim)?.to_vec(), slice(hi, dim)?.to_vec())?)
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failure.
#[no_mangle]
pub extern "C" fn fqc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fqc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from a `char **` out-parameter of this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fqc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Point set from `n` points stored row-major in `coords` (n·dim values) inside
/// the box `[lo, hi]`. Points closer than the default tolerance are merged.
///
/// # Safety
/// `coords` holds `n·dim` values, `lo`/`hi` hold `dim` values, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_pointset_new(
    dim: usize,
    coords: *const f64,
    n: usize,
    lo: *const f64,
    hi: *const f64,
    out_set: *mut *mut FqcPointSet,
) -> FqcStatus {
    guarded(|| {
        let dst = out(out_set)?;
        let c = slice(coords, n.checked_mul(dim).ok_or(Failure::Lib(Error::InvalidArgument("size overflow".into())))?)?;
        let ps = PointSet::new(dim, c.to_vec(), region(dim, lo, hi)?, DEFAULT_DEDUP_TOL)?;
        *dst = Box::into_raw(Box::new(FqcPointSet(ps)));
        Ok(())
    })
}

/// Fibonacci chain in `[-half_width, half_width]`.
///
/// # Safety
/// `out_set` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_pointset_fibonacci(half_width: f64, out_set: *mut *mut FqcPointSet) -> FqcStatus {
    guarded(|| {
        let dst = out(out_set)?;
        let ps = fibonacci_scheme().model_set(&BoxRegion::new(vec![-half_width], vec![half_width])?)?;
        *dst = Box::into_raw(Box::new(FqcPointSet(ps)));
        Ok(())
    })
}

/// # Safety
/// `set` is NULL or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fqc_pointset_free(set: *mut FqcPointSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `set` is a live handle; `out_len` and `out_dim` are writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_pointset_shape(set: *const FqcPointSet, out_len: *mut usize, out_dim: *mut usize) -> FqcStatus {
    guarded(|| {
        let ps = &handle(set)?.0;
        *out(out_len)? = ps.len();
        *out(out_dim)? = ps.dim();
        Ok(())
    })
}

/// Copies up to `cap` coordinates (row-major, lexicographic order) into `buf`
/// and writes the full count to `out_total`.
///
/// # Safety
/// `buf` has room for `cap` values; `out_total` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_pointset_coords(
    set: *const FqcPointSet,
    buf: *mut f64,
    cap: usize,
    out_total: *mut usize,
) -> FqcStatus {
    guarded(|| {
        let c = handle(set)?.0.coords();
        *out(out_total)? = c.len();
        let k = c.len().min(cap);
        if k > 0 {
            if buf.is_null() {
                return Err(Failure::Null);
            }
            ptr::copy_nonoverlapping(c.as_ptr(), buf, k);
        }
        Ok(())
    })
}

/// Minimum pairwise distance; +inf for fewer than two points.
///
/// # Safety
/// `set` is a live handle; `out_distance` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_pointset_min_separation(set: *const FqcPointSet, out_distance: *mut f64) -> FqcStatus {
    guarded(|| {
        *out(out_distance)? = min_separation(&handle(set)?.0).distance;
        Ok(())
    })
}

/// JSON of the point set.
///
/// # Safety
/// `set` is a live handle; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_pointset_to_json(set: *const FqcPointSet, out_json: *mut *mut c_char) -> FqcStatus {
    guarded(|| give_string(to_json(&handle(set)?.0)?, out(out_json)?))
}

/// Discreteness report (JSON) of the point set.
///
/// # Safety
/// `set` is a live handle; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_pointset_classify_json(set: *const FqcPointSet, out_json: *mut *mut c_char) -> FqcStatus {
    guarded(|| give_string(to_json(&classify(&handle(set)?.0)?)?, out(out_json)?))
}

/// Unit-weight comb on a point set.
///
/// # Safety
/// `set` is a live handle; `out_measure` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_measure_unit_comb(set: *const FqcPointSet, out_measure: *mut *mut FqcMeasure) -> FqcStatus {
    guarded(|| {
        let mu = DiscreteMeasure::unit_comb(&handle(set)?.0);
        *out(out_measure)? = Box::into_raw(Box::new(FqcMeasure(mu)));
        Ok(())
    })
}

/// Measure with `n` atoms at row-major `positions` with weights `re + i·im`.
/// `im` may be NULL for real weights.
///
/// # Safety
/// `positions` holds `n·dim` values, `re` (and `im` unless NULL) hold `n`, `lo`/`hi` hold `dim`.
#[no_mangle]
pub unsafe extern "C" fn fqc_measure_new(
    dim: usize,
    positions: *const f64,
    re: *const f64,
    im: *const f64,
    n: usize,
    lo: *const f64,
    hi: *const f64,
    out_measure: *mut *mut FqcMeasure,
) -> FqcStatus {
    guarded(|| {
        let dst = out(out_measure)?;
        let total = n.checked_mul(dim).ok_or(Failure::Lib(Error::InvalidArgument("size overflow".into())))?;
        let pos = slice(positions, total)?;
        let re = slice(re, n)?;
        let im = if im.is_null() { None } else { Some(slice(im, n)?) };
        let weights = (0..n).map(|i| Complex64::new(re[i], im.map_or(0.0, |v| v[i]))).collect();
        let mu = DiscreteMeasure::new(dim, pos.to_vec(), weights, region(dim, lo, hi)?, DEFAULT_DEDUP_TOL)?;
        *dst = Box::into_raw(Box::new(FqcMeasure(mu)));
        Ok(())
    })
}

/// Weighted comb Σ φ̂(p2(γ)) δ_{p1(γ)} of the Fibonacci lattice with the
/// enumeration window `[window_lo, window_hi)`, over `[-half_width, half_width]`.
/// `window_function` uses the textual form, e.g. `"squared:bspline:2:0.45"`.
///
/// # Safety
/// `window_function` is a NUL-terminated string; `out_measure` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_measure_fibonacci_model(
    window_function: *const c_char,
    window_lo: f64,
    window_hi: f64,
    half_width: f64,
    out_measure: *mut *mut FqcMeasure,
) -> FqcStatus {
    guarded(|| {
        let dst = out(out_measure)?;
        let wf = WindowFunction::parse(text(window_function)?)?;
        let scheme = fibonacci_scheme().with_window(Window::interval(window_lo, window_hi)?)?;
        let mu = model_measure(&scheme, &wf, &BoxRegion::new(vec![-half_width], vec![half_width])?)?;
        *dst = Box::into_raw(Box::new(FqcMeasure(mu)));
        Ok(())
    })
}

/// Predicted spectrum of the Fibonacci model measure on `[freq_lo, freq_hi]`,
/// dropping atoms below `min_weight` (pass 0 for the library default).
///
/// # Safety
/// `window_function` is a NUL-terminated string; `out_measure` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_measure_fibonacci_spectrum(
    window_function: *const c_char,
    freq_lo: f64,
    freq_hi: f64,
    min_weight: f64,
    out_measure: *mut *mut FqcMeasure,
) -> FqcStatus {
    guarded(|| {
        let dst = out(out_measure)?;
        let wf = WindowFunction::parse(text(window_function)?)?;
        let mut opts = SpectrumOptions::default();
        if min_weight > 0.0 {
            opts.min_weight = min_weight;
        }
        let spec = predicted_spectrum(&fibonacci_scheme(), &wf, &BoxRegion::new(vec![freq_lo], vec![freq_hi])?, &opts)?;
        *dst = Box::into_raw(Box::new(FqcMeasure(spec)));
        Ok(())
    })
}

/// # Safety
/// `measure` is NULL or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fqc_measure_free(measure: *mut FqcMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// # Safety
/// `measure` is a live handle; `out_len` and `out_dim` are writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_measure_shape(measure: *const FqcMeasure, out_len: *mut usize, out_dim: *mut usize) -> FqcStatus {
    guarded(|| {
        let mu = &handle(measure)?.0;
        *out(out_len)? = mu.len();
        *out(out_dim)? = mu.dim();
        Ok(())
    })
}

/// Exponential sum Σ w·exp(−2πi⟨x, t⟩) at one frequency `t` of length dim.
///
/// # Safety
/// `measure` is a live handle; `t` holds `dim` values; outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_measure_transform_at(
    measure: *const FqcMeasure,
    t: *const f64,
    dim: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> FqcStatus {
    guarded(|| {
        let mu = &handle(measure)?.0;
        if dim != mu.dim() {
            return Err(Error::DimensionMismatch { expected: mu.dim(), got: dim }.into());
        }
        let v = ft_point(mu, slice(t, dim)?);
        *out(out_re)? = v.re;
        *out(out_im)? = v.im;
        Ok(())
    })
}

/// JSON of the measure.
///
/// # Safety
/// `measure` is a live handle; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_measure_to_json(measure: *const FqcMeasure, out_json: *mut *mut c_char) -> FqcStatus {
    guarded(|| give_string(to_json(&handle(measure)?.0)?, out(out_json)?))
}

/// Diffraction report (JSON) at truncation radius `r` on the grid `[lo, hi]`
/// with pitch at most `max_pitch` (0 selects 1/(8r)). Peaks are kept above
/// `relative_threshold` times the grid maximum.
///
/// # Safety
/// `measure` is a live handle; `lo`/`hi` hold dim values; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_diffraction_json(
    measure: *const FqcMeasure,
    r: f64,
    lo: *const f64,
    hi: *const f64,
    max_pitch: f64,
    relative_threshold: f64,
    out_json: *mut *mut c_char,
) -> FqcStatus {
    guarded(|| {
        let mu = &handle(measure)?.0;
        let dim = mu.dim();
        let pitch = if max_pitch > 0.0 { max_pitch } else { 1.0 / (8.0 * r) };
        let grid = FrequencyGrid::with_max_pitch(slice(lo, dim)?, slice(hi, dim)?, pitch)?;
        let opts = DiffractionOptions {
            peaks: PeakOptions {
                threshold: Threshold::Relative(relative_threshold),
                ..Default::default()
            },
            ..Default::default()
        };
        let (_, report) = diffraction_report(mu, r, &grid, &AutocorrelationOptions::default(), &opts, 0)?;
        give_string(to_json(&report)?, out(out_json)?)
    })
}

/// Comb-structure recovery of `measure` given its `spectrum`. Writes the
/// recovery JSON and sets `out_representable` to 1 or 0.
///
/// # Safety
/// Both handles are live; outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn fqc_recover_json(
    measure: *const FqcMeasure,
    spectrum: *const FqcMeasure,
    out_representable: *mut i32,
    out_json: *mut *mut c_char,
) -> FqcStatus {
    guarded(|| {
        let rec = recover_comb(&handle(measure)?.0, &handle(spectrum)?.0, &RecoveryOptions::default())?;
        *out(out_representable)? = i32::from(rec.verdict == RecoveryVerdict::Representable);
        give_string(to_json(&rec)?, out(out_json)?)
    })
}
