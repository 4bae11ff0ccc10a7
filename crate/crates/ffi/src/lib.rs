//! C ABI over the analyticity laboratory.
//!
//! Every fallible entry point returns a [`LabStatus`]; on failure the message
//! is kept per thread and read back with [`lab_last_error`]. Objects cross the
//! boundary as opaque handles owned by the caller and released with the
//! matching `_free` function. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use analyticity_lab::diagnostics::{radius_estimate, sum_ratio_sweep};
use analyticity_lab::extension::{extend_coefficients, extend_flux, extend_solution, restrict, BoundaryMode};
use analyticity_lab::harness;
use analyticity_lab::kernels::{eval_query, KernelId, KernelQuery, QuadratureSpec, Sign};
use analyticity_lab::numerics::io::{read_field, read_series, write_field};
use analyticity_lab::numerics::{Field, Grid, TimeSeries};
use analyticity_lab::projection::{projection_report, SourceTensor};
use analyticity_lab::LabError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Config = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabMode {
    Dirichlet = 0,
    Conormal = 1,
}

/// Opaque grid-sampled field.
pub struct LabField(Field);

/// Opaque time series of fields.
pub struct LabSeries(TimeSeries);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct LabProjectionReport {
    pub identity_residual: f64,
    pub h_residual: f64,
    pub div_q: f64,
    pub normal_trace: f64,
    pub fprime_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LabError) -> LabStatus {
    match e {
        LabError::Io { .. } => LabStatus::Io,
        LabError::Config(_) | LabError::MalformedHeader(_) => LabStatus::Config,
        LabError::InvalidArgument(_)
        | LabError::GridMismatch(_)
        | LabError::HalfspaceGrid
        | LabError::ComponentMismatch { .. }
        | LabError::Coincident
        | LabError::BoundaryFlag(_)
        | LabError::DirichletTrace { .. } => LabStatus::InvalidArgument,
        _ => LabStatus::Numerical,
    }
}

struct Fail(LabStatus, String);

impl From<LabError> for Fail {
    fn from(e: LabError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LabStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(LabStatus::InvalidArgument, msg.into())
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> LabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LabStatus::Ok
        }
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {m}"));
            LabStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn field_arg<'a>(p: *const LabField) -> Result<&'a Field, Fail> {
    p.as_ref().map(|f| &f.0).ok_or_else(|| null("field"))
}

fn mode_of(m: LabMode) -> BoundaryMode {
    match m {
        LabMode::Dirichlet => BoundaryMode::Dirichlet,
        LabMode::Conormal => BoundaryMode::Conormal,
    }
}

fn boxed(f: Field) -> *mut LabField {
    Box::into_raw(Box::new(LabField(f)))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a field from `shape[0..n]`, `origin[0..n]`, spacing `h` and
/// `values` laid out node-major with `components` entries per node.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_field_new(
    n: usize,
    shape: *const usize,
    origin: *const f64,
    h: f64,
    halfspace: bool,
    components: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut LabField,
) -> LabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if n == 0 || shape.is_null() {
            return Err(invalid("need n >= 1 and a shape array"));
        }
        let shape = std::slice::from_raw_parts(shape, n).to_vec();
        let origin = slice_arg(origin, n, "origin")?.to_vec();
        let values = slice_arg(values, len, "values")?.to_vec();
        let grid = Grid::new(n, shape, origin, h, halfspace)?;
        *out = boxed(Field::new(grid, components, values)?);
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_field_read(path: *const c_char, out: *mut *mut LabField) -> LabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = path_arg(path, "path")?;
        *out = boxed(read_field(&p)?);
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn lab_field_write(field: *const LabField, path: *const c_char) -> LabStatus {
    guard(|| {
        let f = field_arg(field)?;
        write_field(&path_arg(path, "path")?, f)?;
        Ok(())
    })
}

/// Releases a field; null is ignored.
///
/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lab_field_free(field: *mut LabField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Node count, component count and spatial dimension of a field.
///
/// # Safety
/// `field` must come from this library; each out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn lab_field_info(field: *const LabField, nodes: *mut usize, components: *mut usize, dim: *mut usize) -> LabStatus {
    guard(|| {
        let f = field_arg(field)?;
        if let Some(p) = nodes.as_mut() {
            *p = f.grid.len();
        }
        if let Some(p) = components.as_mut() {
            *p = f.components;
        }
        if let Some(p) = dim.as_mut() {
            *p = f.grid.n;
        }
        Ok(())
    })
}

/// Copies the values into `buf`, which must hold nodes * components entries.
///
/// # Safety
/// `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lab_field_values(field: *const LabField, buf: *mut f64, len: usize) -> LabStatus {
    guard(|| {
        let f = field_arg(field)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < f.values.len() {
            return Err(invalid(format!("buffer holds {len} values, field has {}", f.values.len())));
        }
        std::slice::from_raw_parts_mut(buf, f.values.len()).copy_from_slice(&f.values);
        Ok(())
    })
}

/// Reflects a half-space field across x_n = 0. Scalars, flux vectors and
/// coefficient tensors are told apart by the component count.
///
/// # Safety
/// `field` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_extend(field: *const LabField, mode: LabMode, out: *mut *mut LabField) -> LabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let f = field_arg(field)?;
        let n = f.grid.n;
        let e = match f.components {
            1 => extend_solution(f, mode_of(mode), None)?,
            c if c == n => extend_flux(f, mode_of(mode))?,
            c if c == n * n => extend_coefficients(f)?,
            c => return Err(LabError::ComponentMismatch { expected: 1, found: c }.into()),
        };
        *out = boxed(e);
        Ok(())
    })
}

/// Restriction of a mirrored field back onto the grid of `half`.
///
/// # Safety
/// Both handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_restrict(field: *const LabField, half: *const LabField, out: *mut *mut LabField) -> LabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = restrict(field_arg(field)?, &field_arg(half)?.grid)?;
        *out = boxed(r);
        Ok(())
    })
}

/// Builds F' from an n*n source tensor and fills `report`.
///
/// # Safety
/// `source` must come from this library; `out` must be writable; `report` may be null.
#[no_mangle]
pub unsafe extern "C" fn lab_project(source: *const LabField, boundary_tol: f64, out: *mut *mut LabField, report: *mut LabProjectionReport) -> LabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let f = field_arg(source)?.clone();
        let (fp, r) = projection_report(&SourceTensor::new(f, boundary_tol)?)?;
        if let Some(rep) = report.as_mut() {
            *rep = LabProjectionReport {
                identity_residual: r.identity_residual,
                h_residual: r.h_residual,
                div_q: r.div_q,
                normal_trace: r.normal_trace,
                fprime_max: r.fprime_max,
            };
        }
        *out = boxed(fp);
        Ok(())
    })
}

/// Evaluates kernel `name` (E, N, Nminus, Gamma, G, Gstar, K) at `x`, `y`
/// in dimension `n`. `t < 0` means no time argument; `sign` is +1, -1 or 0.
///
/// # Safety
/// `name` must be NUL-terminated; `x`, `y` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_kernel_eval(
    name: *const c_char,
    i: usize,
    j: usize,
    q: usize,
    t: f64,
    x: *const f64,
    y: *const f64,
    n: usize,
    sign: i32,
    deriv: usize,
    out: *mut f64,
) -> LabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if name.is_null() {
            return Err(null("name"));
        }
        let id: KernelId = CStr::from_ptr(name).to_str().map_err(|_| invalid("kernel name is not UTF-8"))?.parse()?;
        let sign = match sign {
            0 => None,
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            s => return Err(invalid(format!("sign must be -1, 0 or 1, got {s}"))),
        };
        let query = KernelQuery {
            kernel: id,
            indices: [i, j, q],
            t: (t >= 0.0).then_some(t),
            x: slice_arg(x, n, "x")?.to_vec(),
            y: slice_arg(y, n, "y")?.to_vec(),
            sign,
            deriv,
        };
        *out = eval_query(&query, &QuadratureSpec::default())?;
        Ok(())
    })
}

/// Radius estimate from a derivative ladder `d[0..len]`.
///
/// # Safety
/// `d` must hold `len` doubles; `delta` must be writable; `lower_bound_only` may be null.
#[no_mangle]
pub unsafe extern "C" fn lab_radius_estimate(d: *const f64, len: usize, cap: f64, delta: *mut f64, lower_bound_only: *mut bool) -> LabStatus {
    guard(|| {
        let delta = out_arg(delta, "delta")?;
        let r = radius_estimate(slice_arg(d, len, "d")?, cap)?;
        *delta = r.delta;
        if let Some(p) = lower_bound_only.as_mut() {
            *p = r.lower_bound_only || r.capped;
        }
        Ok(())
    })
}

/// Suprema of the combinatorial sum ratio over k <= k_max / 2 and k <= k_max.
///
/// # Safety
/// Out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_sum_ratio(k_max: usize, sup_half: *mut f64, sup_full: *mut f64) -> LabStatus {
    guard(|| {
        let half = out_arg(sup_half, "sup_half")?;
        let full = out_arg(sup_full, "sup_full")?;
        let s = sum_ratio_sweep(k_max)?;
        *half = s.sup_half;
        *full = s.sup_full;
        Ok(())
    })
}

/// # Safety
/// `dir` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_series_read(dir: *const c_char, out: *mut *mut LabSeries) -> LabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = read_series(&path_arg(dir, "dir")?)?;
        *out = Box::into_raw(Box::new(LabSeries(s)));
        Ok(())
    })
}

/// # Safety
/// `series` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lab_series_free(series: *mut LabSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of snapshots, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn lab_series_len(series: *const LabSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// Time and a copy of snapshot `index`.
///
/// # Safety
/// `series` must come from this library; out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_series_get(series: *const LabSeries, index: usize, time: *mut f64, out: *mut *mut LabField) -> LabStatus {
    guard(|| {
        let s = &series.as_ref().ok_or_else(|| null("series"))?.0;
        let time = out_arg(time, "time")?;
        let out = out_arg(out, "out")?;
        if index >= s.len() {
            return Err(invalid(format!("snapshot {index} out of range ({} stored)", s.len())));
        }
        *time = s.times[index];
        *out = boxed(s.snapshots[index].clone());
        Ok(())
    })
}

/// Runs a catalog experiment config, writing artifacts to `out_dir`.
/// `exit_code` receives 0 when all criteria pass, 1 on a failed criterion
/// and 2 on a config error; the status reports only whether the run happened.
///
/// # Safety
/// Strings must be NUL-terminated; `exit_code` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lab_run_config(config: *const c_char, out_dir: *const c_char, exit_code: *mut i32) -> LabStatus {
    guard(|| {
        let code = out_arg(exit_code, "exit_code")?;
        let o = harness::run(&path_arg(config, "config")?, &path_arg(out_dir, "out_dir")?);
        *code = o.code;
        if o.code == 2 {
            return Err(Fail(LabStatus::Config, o.message));
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, LabStatus::Panic);
        let msg = unsafe { CStr::from_ptr(lab_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
        assert_eq!(guard(|| Ok(())), LabStatus::Ok);
        assert!(lab_last_error().is_null());
    }

    #[test]
    fn error_is_thread_local() {
        set_error("here".into());
        let other = std::thread::spawn(|| lab_last_error().is_null()).join().unwrap();
        assert!(other);
        assert!(!lab_last_error().is_null());
    }
}
