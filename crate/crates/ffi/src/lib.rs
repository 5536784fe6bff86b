//! C ABI over `symgp`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`-style
//! calls and released with the matching `*_free`. Every fallible call returns a
//! [`SymgpStatus`]; on failure a message is kept per thread and can be read with
//! [`symgp_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use symgp::geom::{build_nn_index, hausdorff_distance, PointSet, RigidTransform, RotationMatrix, Vec3};
use symgp::gp::{build_gp, GroupedPrimitives};
use symgp::metrics::{agpd, amgpd, mgpd};
use symgp::shape::{generate_shape, load_model, ModelFormat, ShapeSpec};
use symgp::symmetry::{detect, Category, DetectorConfig, SymmetrySet};
use symgp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymgpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Precondition = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymgpCategory {
    Asymmetric = 0,
    Cat1 = 1,
    Cat2 = 2,
    Cat3 = 3,
    Cat4 = 4,
    Cat5 = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymgpMetric {
    Agpd = 0,
    Mgpd = 1,
    /// MGPD for category 2, AGPD otherwise.
    Amgpd = 2,
}

/// Rigid pose `p -> R p + t`, rotation stored row-major.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SymgpPose {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

/// Opaque point set.
pub struct SymgpPointSet(PointSet);

/// Opaque detected symmetry.
pub struct SymgpSymmetry(SymmetrySet);

/// Opaque grouped primitives.
pub struct SymgpGp(GroupedPrimitives);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SymgpStatus {
    match e {
        Error::InvalidArgument(_) | Error::EmptyModel => SymgpStatus::InvalidArgument,
        Error::Parse { .. } | Error::Json(_) => SymgpStatus::Parse,
        Error::Precondition(_) => SymgpStatus::Precondition,
        Error::Io { .. } => SymgpStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F>(f: F) -> SymgpStatus
where
    F: FnOnce() -> Result<(), (SymgpStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SymgpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SymgpStatus::Panic
        }
    }
}

type Fallible<T> = Result<T, (SymgpStatus, String)>;

fn lift<T>(r: symgp::Result<T>) -> Fallible<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<'a, T>(p: *const T, what: &str) -> Fallible<&'a T> {
    // SAFETY: callers pass handles obtained from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| (SymgpStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<'a, T>(p: *mut T, what: &str) -> Fallible<&'a mut T> {
    // SAFETY: callers pass writable storage or null.
    unsafe { p.as_mut() }.ok_or_else(|| (SymgpStatus::NullPointer, format!("{what} is null")))
}

fn c_str<'a>(p: *const c_char, what: &str) -> Fallible<&'a str> {
    if p.is_null() {
        return Err((SymgpStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and NUL-terminated by contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| (SymgpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn pose(p: &SymgpPose) -> Fallible<RigidTransform> {
    let r = p.rotation;
    let rot = lift(RotationMatrix::from_rows([[r[0], r[1], r[2]], [r[3], r[4], r[5]], [r[6], r[7], r[8]]]))?;
    Ok(RigidTransform::new(rot, Vec3::new(p.translation[0], p.translation[1], p.translation[2])))
}

/// Message of the last failed call on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn symgp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn symgp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `n` points from `xyz` (`3 n` doubles).
///
/// # Safety
/// `xyz` must point to `3 * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_pointset_new(xyz: *const f64, n: usize, out: *mut *mut SymgpPointSet) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if xyz.is_null() {
            return Err((SymgpStatus::NullPointer, "xyz is null".into()));
        }
        let len = n
            .checked_mul(3)
            .ok_or_else(|| (SymgpStatus::InvalidArgument, "point count overflows".to_string()))?;
        // SAFETY: the caller guarantees 3 n readable doubles.
        let raw = unsafe { std::slice::from_raw_parts(xyz, len) };
        let pts = raw.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        let set = lift(PointSet::new(pts))?;
        *out = Box::into_raw(Box::new(SymgpPointSet(set)));
        Ok(())
    })
}

/// Loads an OBJ, PLY or CSV model, chosen by extension.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_pointset_load(path: *const c_char, out: *mut *mut SymgpPointSet) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = Path::new(c_str(path, "path")?);
        let fmt = ModelFormat::from_path(path).ok_or_else(|| {
            (SymgpStatus::InvalidArgument, format!("unknown model format: {}", path.display()))
        })?;
        let set = lift(load_model(path, fmt))?;
        *out = Box::into_raw(Box::new(SymgpPointSet(set)));
        Ok(())
    })
}

/// Generates a toy shape such as `"pyramid:4"` or `"cube@3000"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_pointset_generate(
    spec: *const c_char,
    seed: u64,
    out: *mut *mut SymgpPointSet,
) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec: ShapeSpec = lift(c_str(spec, "spec")?.parse())?;
        let set = lift(generate_shape(&spec, seed))?;
        *out = Box::into_raw(Box::new(SymgpPointSet(set)));
        Ok(())
    })
}

/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_pointset_len(set: *const SymgpPointSet, out: *mut usize) -> SymgpStatus {
    guard(|| {
        *out_ptr(out, "out")? = non_null(set, "set")?.0.len();
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symgp_pointset_free(set: *mut SymgpPointSet) {
    if !set.is_null() {
        // SAFETY: created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(set) });
    }
}

/// Symmetric Hausdorff distance between two point sets.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_hausdorff(
    a: *const SymgpPointSet,
    b: *const SymgpPointSet,
    out: *mut f64,
) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (a, b) = (&non_null(a, "a")?.0, &non_null(b, "b")?.0);
        *out = lift(hausdorff_distance(a, &build_nn_index(a), b, &build_nn_index(b)))?;
        Ok(())
    })
}

/// Detects symmetry with the default detector settings.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_detect(set: *const SymgpPointSet, out: *mut *mut SymgpSymmetry) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let sym = lift(detect(&non_null(set, "set")?.0, &DetectorConfig::default()))?;
        *out = Box::into_raw(Box::new(SymgpSymmetry(sym)));
        Ok(())
    })
}

/// # Safety
/// `sym` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_symmetry_category(sym: *const SymgpSymmetry, out: *mut SymgpCategory) -> SymgpStatus {
    guard(|| {
        *out_ptr(out, "out")? = match non_null(sym, "sym")?.0.category {
            Category::Asymmetric => SymgpCategory::Asymmetric,
            Category::Cat1 => SymgpCategory::Cat1,
            Category::Cat2 => SymgpCategory::Cat2,
            Category::Cat3 => SymgpCategory::Cat3,
            Category::Cat4 => SymgpCategory::Cat4,
            Category::Cat5 => SymgpCategory::Cat5,
        };
        Ok(())
    })
}

/// Number of geometric symmetry axes (one per line).
///
/// # Safety
/// `sym` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_symmetry_axis_count(sym: *const SymgpSymmetry, out: *mut usize) -> SymgpStatus {
    guard(|| {
        *out_ptr(out, "out")? = non_null(sym, "sym")?.0.geometric_axes().len();
        Ok(())
    })
}

/// Axis `index`: unit direction, order, and whether it is continuous.
///
/// # Safety
/// `sym` must be a live handle; `axis` must hold 3 doubles; the other outputs
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_symmetry_axis(
    sym: *const SymgpSymmetry,
    index: usize,
    axis: *mut f64,
    order: *mut u32,
    continuous: *mut bool,
) -> SymgpStatus {
    guard(|| {
        let axes = non_null(sym, "sym")?.0.geometric_axes();
        let a = axes.get(index).ok_or_else(|| {
            (SymgpStatus::InvalidArgument, format!("axis index {index} out of range ({})", axes.len()))
        })?;
        if axis.is_null() {
            return Err((SymgpStatus::NullPointer, "axis is null".into()));
        }
        let e = a.axis();
        // SAFETY: the caller provides room for three doubles.
        unsafe { std::slice::from_raw_parts_mut(axis, 3) }.copy_from_slice(&[e.x, e.y, e.z]);
        *out_ptr(order, "order")? = a.order();
        *out_ptr(continuous, "continuous")? = a.is_continuous();
        Ok(())
    })
}

/// # Safety
/// `sym` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symgp_symmetry_free(sym: *mut SymgpSymmetry) {
    if !sym.is_null() {
        // SAFETY: created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(sym) });
    }
}

/// Grouped primitives at `radius` normalized units; a non-positive radius means
/// the detected object radius.
///
/// # Safety
/// `sym` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_gp_build(sym: *const SymgpSymmetry, radius: f64, out: *mut *mut SymgpGp) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let sym = &non_null(sym, "sym")?.0;
        let r = if radius > 0.0 { radius } else { sym.radius };
        let gp = lift(build_gp(sym, r))?;
        *out = Box::into_raw(Box::new(SymgpGp(gp)));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_gp_from_json(json: *const c_char, out: *mut *mut SymgpGp) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let gp = lift(GroupedPrimitives::from_json(c_str(json, "json")?))?;
        *out = Box::into_raw(Box::new(SymgpGp(gp)));
        Ok(())
    })
}

/// Serializes to JSON; release the string with [`symgp_string_free`].
///
/// # Safety
/// `gp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_gp_to_json(gp: *const SymgpGp, out: *mut *mut c_char) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = lift(non_null(gp, "gp")?.0.to_json())?;
        let c = CString::new(text).map_err(|_| (SymgpStatus::Parse, "JSON contains NUL".to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `gp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_gp_group_count(gp: *const SymgpGp, out: *mut usize) -> SymgpStatus {
    guard(|| {
        *out_ptr(out, "out")? = non_null(gp, "gp")?.0.groups().len();
        Ok(())
    })
}

/// # Safety
/// `gp` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symgp_gp_free(gp: *mut SymgpGp) {
    if !gp.is_null() {
        // SAFETY: created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(gp) });
    }
}

/// Grouped-primitive distance between an estimated and a ground-truth pose.
/// `metric` takes a [`SymgpMetric`] value.
///
/// # Safety
/// `gp`, `t_hat` and `t_dot` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symgp_distance(
    gp: *const SymgpGp,
    metric: u32,
    t_hat: *const SymgpPose,
    t_dot: *const SymgpPose,
    out: *mut f64,
) -> SymgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let gp = &non_null(gp, "gp")?.0;
        let (a, b) = (pose(non_null(t_hat, "t_hat")?)?, pose(non_null(t_dot, "t_dot")?)?);
        *out = match metric {
            m if m == SymgpMetric::Agpd as u32 => agpd(gp, &a, &b),
            m if m == SymgpMetric::Mgpd as u32 => mgpd(gp, &a, &b),
            m if m == SymgpMetric::Amgpd as u32 => amgpd(gp, &a, &b),
            m => return Err((SymgpStatus::InvalidArgument, format!("unknown metric {m}"))),
        }
        .value;
        Ok(())
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symgp_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: created by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}
