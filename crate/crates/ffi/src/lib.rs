//! C interface to the reconstruction pipeline.
//!
//! Point sets and meshes are opaque handles created and freed by this
//! library. Every fallible call returns an [`SrStatus`]; on failure the
//! message is available from [`sr_last_error`] on the same thread until the
//! next failing call. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use smoothrecon::error::ErrorClass;
use smoothrecon::io::{load_samples, save_mesh, LoadOptions, MeshFormat, PointFormat};
use smoothrecon::pipeline::{reconstruct, ReconstructionParams};
use smoothrecon::{metrics, Dims, EnergyModel, Error, Sample, SampleSet, SolverParams, TriangleMesh, Vec3};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// File could not be opened, read or written.
    Io = 2,
    /// File contents were malformed or empty.
    Input = 3,
    /// A parameter was out of range.
    Config = 4,
    /// The solver met a non-finite value.
    Solver = 5,
    /// A caller buffer was too small, or another invariant failed.
    Invalid = 6,
    /// Internal error; the library state is unchanged.
    Panic = 7,
}

/// Oriented point set in world coordinates.
pub struct SrPointSet(SampleSet);

/// Triangle mesh in world coordinates.
pub struct SrMesh(TriangleMesh);

/// Reconstruction settings. Start from [`sr_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrParams {
    /// Finest grid, vertices per axis.
    pub grid: [u32; 3],
    /// Smoothness model 1-4.
    pub energy: u32,
    pub lambda: f64,
    pub tol: f64,
    pub max_sweeps: u32,
    pub levels: u32,
    /// Nonzero keeps the field in [-1, 1].
    pub clamp: u32,
    /// Fine-level band radius in cells; negative disables the band.
    pub narrow_band_radius: f64,
    pub smoothing_passes: u32,
    pub margin_cells: u32,
}

/// Fit and curvature statistics of one mesh.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SrMetrics {
    pub triangles: u64,
    pub rms: f64,
    pub avg_mean: f64,
    pub max_mean: f64,
    pub avg_gauss: f64,
    pub max_gauss: f64,
    pub excluded_vertices: u64,
    pub degenerate_triangles: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SrStatus {
    match e.class() {
        ErrorClass::Io => SrStatus::Io,
        ErrorClass::Input => SrStatus::Input,
        ErrorClass::Config => SrStatus::Config,
        ErrorClass::Solver => SrStatus::Solver,
        ErrorClass::Invalid => SrStatus::Invalid,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("{what} is null"));
            SrStatus::NullArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Invalid(m))) => {
            set_last_error(&m);
            SrStatus::Invalid
        }
        Err(payload) => {
            let m = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal error: {m}"));
            SrStatus::Panic
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure::Lib(Error::Config("path is not valid UTF-8".into())))?;
    Ok(PathBuf::from(s))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn sr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fills `out` with the library defaults.
///
/// # Safety
/// `out` must be null or point to writable memory for one `SrParams`.
#[no_mangle]
pub unsafe extern "C" fn sr_params_default(out: *mut SrParams) -> SrStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or(Failure::Null("out"))?;
        let r = ReconstructionParams::default();
        let s = &r.solver;
        *out = SrParams {
            grid: r.dims.0.map(|n| n as u32),
            energy: r.model.index() as u32,
            lambda: s.lambda,
            tol: s.tol,
            max_sweeps: s.max_sweeps as u32,
            levels: s.levels as u32,
            clamp: s.clamp as u32,
            narrow_band_radius: s.narrow_band_radius.unwrap_or(-1.0),
            smoothing_passes: r.smoothing_passes as u32,
            margin_cells: r.margin_cells as u32,
        };
        Ok(())
    })
}

fn to_params(p: &SrParams) -> Result<ReconstructionParams, Failure> {
    let model = u8::try_from(p.energy)
        .ok()
        .and_then(EnergyModel::from_index)
        .ok_or_else(|| Failure::Lib(Error::Config(format!("energy model must be 1-4, got {}", p.energy))))?;
    Ok(ReconstructionParams {
        dims: Dims(p.grid.map(|n| n as usize)),
        model,
        solver: SolverParams {
            lambda: p.lambda,
            tol: p.tol,
            max_sweeps: p.max_sweeps as usize,
            clamp: p.clamp != 0,
            levels: p.levels as usize,
            narrow_band_radius: (p.narrow_band_radius >= 0.0).then_some(p.narrow_band_radius),
            ..SolverParams::default()
        },
        smoothing_passes: p.smoothing_passes as usize,
        margin_cells: p.margin_cells as usize,
        ..ReconstructionParams::default()
    })
}

/// Reads an oriented point set; the format follows the file extension
/// (`.ply`, `.xyz`, `.obj`).
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sr_points_load(path: *const c_char, out: *mut *mut SrPointSet) -> SrStatus {
    guard(|| {
        let path = unsafe { path_arg(path) }?;
        let format = PointFormat::from_path(&path).ok_or_else(|| {
            Failure::Lib(Error::Config(format!("{}: unknown point format", path.display())))
        })?;
        let loaded = load_samples(&path, format, &LoadOptions::default())?;
        unsafe { write_out(out, SrPointSet(loaded.samples)) }
    })
}

/// Builds a point set from `count` interleaved xyz positions and normals.
///
/// # Safety
/// `points` and `normals` must each be null or hold `3 * count` doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_points_from_arrays(
    points: *const f64,
    normals: *const f64,
    count: usize,
    out: *mut *mut SrPointSet,
) -> SrStatus {
    guard(|| {
        if points.is_null() {
            return Err(Failure::Null("points"));
        }
        if normals.is_null() {
            return Err(Failure::Null("normals"));
        }
        let len = count
            .checked_mul(3)
            .ok_or_else(|| Failure::Invalid("count overflows".into()))?;
        let p = unsafe { std::slice::from_raw_parts(points, len) };
        let n = unsafe { std::slice::from_raw_parts(normals, len) };
        let samples: Vec<Sample> = p
            .chunks_exact(3)
            .zip(n.chunks_exact(3))
            .map(|(p, n)| Sample::new(Vec3::new(p[0], p[1], p[2]), Vec3::new(n[0], n[1], n[2])))
            .collect();
        if samples.iter().any(|s| !s.point.iter().chain(s.normal.iter()).all(|v| v.is_finite())) {
            return Err(Failure::Lib(Error::InvalidParameter("non-finite coordinate".into())));
        }
        unsafe { write_out(out, SrPointSet(SampleSet::world(samples))) }
    })
}

/// Number of samples; 0 for null.
///
/// # Safety
/// `points` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_points_count(points: *const SrPointSet) -> usize {
    unsafe { points.as_ref() }.map_or(0, |p| p.0.len())
}

/// # Safety
/// `points` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sr_points_free(points: *mut SrPointSet) {
    if !points.is_null() {
        drop(unsafe { Box::from_raw(points) });
    }
}

/// Runs the full reconstruction. `params` may be null for the defaults.
///
/// # Safety
/// `points` must be a live handle; `params` null or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_reconstruct(
    points: *const SrPointSet,
    params: *const SrParams,
    out: *mut *mut SrMesh,
) -> SrStatus {
    guard(|| {
        let points = unsafe { reference(points, "points") }?;
        let params = match unsafe { params.as_ref() } {
            Some(p) => to_params(p)?,
            None => ReconstructionParams::default(),
        };
        let r = reconstruct(&points.0, &params)?;
        unsafe { write_out(out, SrMesh(r.mesh)) }
    })
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_mesh_vertex_count(mesh: *const SrMesh) -> usize {
    unsafe { mesh.as_ref() }.map_or(0, |m| m.0.vertices.len())
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_mesh_triangle_count(mesh: *const SrMesh) -> usize {
    unsafe { mesh.as_ref() }.map_or(0, |m| m.0.triangles.len())
}

/// Copies vertex positions as interleaved xyz. `capacity` counts doubles
/// and must be at least three times the vertex count.
///
/// # Safety
/// `mesh` must be a live handle and `out` writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_mesh_copy_vertices(mesh: *const SrMesh, out: *mut f64, capacity: usize) -> SrStatus {
    guard(|| {
        let mesh = unsafe { reference(mesh, "mesh") }?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let need = mesh.0.vertices.len() * 3;
        if capacity < need {
            return Err(Failure::Invalid(format!("buffer holds {capacity} doubles, {need} needed")));
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(out, need) };
        for (d, v) in dst.chunks_exact_mut(3).zip(&mesh.0.vertices) {
            d.copy_from_slice(v.as_slice());
        }
        Ok(())
    })
}

/// Copies triangle corner indices. `capacity` counts integers and must be
/// at least three times the triangle count.
///
/// # Safety
/// `mesh` must be a live handle and `out` writable for `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn sr_mesh_copy_triangles(mesh: *const SrMesh, out: *mut u32, capacity: usize) -> SrStatus {
    guard(|| {
        let mesh = unsafe { reference(mesh, "mesh") }?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let need = mesh.0.triangles.len() * 3;
        if capacity < need {
            return Err(Failure::Invalid(format!("buffer holds {capacity} indices, {need} needed")));
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(out, need) };
        for (d, t) in dst.chunks_exact_mut(3).zip(&mesh.0.triangles) {
            d.copy_from_slice(t);
        }
        Ok(())
    })
}

/// Writes the mesh; the format follows the extension (`.ply`, `.obj`).
///
/// # Safety
/// `mesh` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sr_mesh_save(mesh: *const SrMesh, path: *const c_char) -> SrStatus {
    guard(|| {
        let mesh = unsafe { reference(mesh, "mesh") }?;
        let path = unsafe { path_arg(path) }?;
        let format = MeshFormat::from_path(&path).ok_or_else(|| {
            Failure::Lib(Error::Config(format!("{}: unknown mesh format", path.display())))
        })?;
        save_mesh(&mesh.0, &path, format)?;
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sr_mesh_free(mesh: *mut SrMesh) {
    if !mesh.is_null() {
        drop(unsafe { Box::from_raw(mesh) });
    }
}

/// RMS distance from `points` to `mesh` and curvature statistics of `mesh`.
///
/// # Safety
/// `mesh` and `points` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_metrics(mesh: *const SrMesh, points: *const SrPointSet, out: *mut SrMetrics) -> SrStatus {
    guard(|| {
        let mesh = unsafe { reference(mesh, "mesh") }?;
        let points = unsafe { reference(points, "points") }?;
        let out = unsafe { out.as_mut() }.ok_or(Failure::Null("out"))?;
        let rms = metrics::rms_distance(points.0.points(), &mesh.0)?;
        let c = metrics::curvature_stats(&mesh.0)?;
        *out = SrMetrics {
            triangles: mesh.0.triangles.len() as u64,
            rms,
            avg_mean: c.avg_mean,
            max_mean: c.max_mean,
            avg_gauss: c.avg_gauss,
            max_gauss: c.max_gauss,
            excluded_vertices: c.excluded_vertices as u64,
            degenerate_triangles: c.degenerate_triangles as u64,
        };
        Ok(())
    })
}
