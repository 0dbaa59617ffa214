//! C ABI over the pointsbr engine.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`PsbrStatus`]; on failure, [`psbr_last_error`] describes the cause for
//! the calling thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use pointsbr::accel::Bvh;
use pointsbr::em::Polarization;
use pointsbr::geom::{io, PointCloud, Vec3};
use pointsbr::gfb::{self, Splat};
use pointsbr::oracle::{reference_sbr_rcs, MeshScene};
use pointsbr::pri::{format, Gfb};
use pointsbr::sim::{self, SimParams};
use pointsbr::{shapes, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsbrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGeometry = 3,
    Io = 4,
    Format = 5,
    Backend = 6,
    Panic = 7,
}

/// Point samples of a target surface.
pub struct PsbrCloud {
    points: Vec<Vec3>,
}

/// One geometry frame buffer: depth, normals and mask on a screen.
pub struct PsbrGfb {
    gfb: Gfb,
}

/// Oriented disks fused from frame buffers.
pub struct PsbrSplats {
    splats: Vec<Splat>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PsbrStatus {
    match e {
        Error::InvalidGeometry(_) => PsbrStatus::InvalidGeometry,
        Error::Io(_) => PsbrStatus::Io,
        Error::Format { .. } => PsbrStatus::Format,
        Error::Backend { .. } => PsbrStatus::Backend,
        _ => PsbrStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PsbrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PsbrStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed as {what}"));
            PsbrStatus::NullPointer
        }
        Ok(Err(Failure::Engine(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            PsbrStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn path_arg(ptr: *const c_char, what: &'static str) -> Result<PathBuf, Failure> {
    let s = deref(ptr, what)?;
    let s = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Error::InvalidArgument(format!("{what} is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn store<T>(out: *mut *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    *out = value;
    Ok(())
}

fn params(frequency_hz: f64) -> Result<SimParams, Failure> {
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {frequency_hz}")).into());
    }
    Ok(SimParams {
        frequency: frequency_hz,
        polarization: Polarization::Theta,
        ..SimParams::default()
    })
}

/// Message of the calling thread's most recent failure, or null. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn psbr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn psbr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a point cloud from an XYZ or PLY file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_cloud_load(path: *const c_char, out: *mut *mut PsbrCloud) -> PsbrStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        let points = io::read_cloud(&path)?.into_points();
        store(out, PsbrCloud { points }, "out")
    })
}

/// Copies `count` points from `xyz` (interleaved x, y, z) into a new cloud.
///
/// # Safety
/// `xyz` must point to `3 * count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_cloud_from_points(xyz: *const f64, count: usize, out: *mut *mut PsbrCloud) -> PsbrStatus {
    guard(|| {
        deref(xyz, "xyz")?;
        let raw = std::slice::from_raw_parts(xyz, count * 3);
        let points = raw.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        let cloud = PointCloud::new(points)?;
        store(out, PsbrCloud { points: cloud.into_points() }, "out")
    })
}

/// Number of points in `cloud`, or 0 for null.
///
/// # Safety
/// `cloud` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn psbr_cloud_len(cloud: *const PsbrCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.points.len())
}

/// # Safety
/// `cloud` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn psbr_cloud_free(cloud: *mut PsbrCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Traces `cloud` from direction `(theta, phi)` in degrees at
/// `frequency_hz` and refines the coarse depth with the classical backend.
///
/// # Safety
/// `cloud` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_trace_refine(
    cloud: *const PsbrCloud,
    theta_deg: f64,
    phi_deg: f64,
    frequency_hz: f64,
    out: *mut *mut PsbrGfb,
) -> PsbrStatus {
    guard(|| {
        let cloud = deref(cloud, "cloud")?;
        let p = params(frequency_hz)?;
        let (center, radius) = sim::bounding_sphere(&cloud.points);
        let bvh = Bvh::build(cloud.points.clone())?;
        let gfb = sim::point_gfb(&bvh, center, radius, theta_deg, phi_deg, &p)?;
        store(out, PsbrGfb { gfb }, "out")
    })
}

/// Reads a GFB1 file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_gfb_read(path: *const c_char, out: *mut *mut PsbrGfb) -> PsbrStatus {
    guard(|| {
        let gfb = format::read_gfb(path_arg(path, "path")?)?;
        store(out, PsbrGfb { gfb }, "out")
    })
}

/// Writes `gfb` as a GFB1 file.
///
/// # Safety
/// `gfb` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn psbr_gfb_write(gfb: *const PsbrGfb, path: *const c_char) -> PsbrStatus {
    guard(|| {
        let gfb = deref(gfb, "gfb")?;
        Ok(format::write_gfb(path_arg(path, "path")?, &gfb.gfb)?)
    })
}

/// Screen size and number of masked-in pixels of `gfb`.
///
/// # Safety
/// `gfb` must be a live handle; each output pointer must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_gfb_info(
    gfb: *const PsbrGfb,
    width: *mut usize,
    height: *mut usize,
    hits: *mut usize,
) -> PsbrStatus {
    guard(|| {
        let g = &deref(gfb, "gfb")?.gfb;
        write_out(width, g.frame.width, "width")?;
        write_out(height, g.frame.height, "height")?;
        write_out(hits, g.hit_count(), "hits")
    })
}

/// # Safety
/// `gfb` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn psbr_gfb_free(gfb: *mut PsbrGfb) {
    if !gfb.is_null() {
        drop(Box::from_raw(gfb));
    }
}

/// Edge-filters `count` frame buffers and fuses them into splats on a
/// `resolution`³ grid.
///
/// # Safety
/// `gfbs` must point to `count` live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_fuse(
    gfbs: *const *const PsbrGfb,
    count: usize,
    resolution: usize,
    out: *mut *mut PsbrSplats,
) -> PsbrStatus {
    guard(|| {
        deref(gfbs, "gfbs")?;
        let filtered = std::slice::from_raw_parts(gfbs, count)
            .iter()
            .map(|&g| {
                let g = &deref(g, "gfbs element")?.gfb;
                let (low, high) = gfb::default_thresholds(g.frame.pitch);
                Ok(gfb::edge_filter(g, low, high))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let p = SimParams {
            fusion_resolution: resolution,
            ..SimParams::default()
        };
        let splats = sim::splats_from_gfbs(&filtered, &p)?;
        store(out, PsbrSplats { splats }, "out")
    })
}

/// Number of splats, or 0 for null.
///
/// # Safety
/// `splats` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn psbr_splats_len(splats: *const PsbrSplats) -> usize {
    splats.as_ref().map_or(0, |s| s.splats.len())
}

/// Writes `splats` as an SPL1 file.
///
/// # Safety
/// `splats` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn psbr_splats_write(splats: *const PsbrSplats, path: *const c_char) -> PsbrStatus {
    guard(|| {
        let s = deref(splats, "splats")?;
        Ok(gfb::write_splats(path_arg(path, "path")?, &s.splats)?)
    })
}

/// # Safety
/// `splats` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn psbr_splats_free(splats: *mut PsbrSplats) {
    if !splats.is_null() {
        drop(Box::from_raw(splats));
    }
}

/// Monostatic RCS (dBsm) of `splats` from `(theta, phi)` in degrees with up
/// to `max_bounce` reflections.
///
/// # Safety
/// `splats` must be a live handle; `out_dbsm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_rcs_splats(
    splats: *const PsbrSplats,
    theta_deg: f64,
    phi_deg: f64,
    frequency_hz: f64,
    max_bounce: usize,
    out_dbsm: *mut f64,
) -> PsbrStatus {
    guard(|| {
        let s = deref(splats, "splats")?;
        let p = SimParams {
            max_bounce,
            ..params(frequency_hz)?
        };
        let row = sim::mbc_sweep(&s.splats, &[(theta_deg, phi_deg)], &p)?;
        write_out(out_dbsm, row[0].rcs_dbsm, "out_dbsm")
    })
}

/// Single-bounce physical-optics monostatic RCS (dBsm) of `cloud`.
///
/// # Safety
/// `cloud` must be a live handle; `out_dbsm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_rcs_cloud(
    cloud: *const PsbrCloud,
    theta_deg: f64,
    phi_deg: f64,
    frequency_hz: f64,
    out_dbsm: *mut f64,
) -> PsbrStatus {
    guard(|| {
        let c = deref(cloud, "cloud")?;
        let row = sim::po_sweep_points(&c.points, &[(theta_deg, phi_deg)], &params(frequency_hz)?)?;
        write_out(out_dbsm, row[0].rcs_dbsm, "out_dbsm")
    })
}

/// Reference RCS (dBsm) of a square plate of side `side_m` in the `z = 0`
/// plane, traced on its exact triangle mesh.
///
/// # Safety
/// `out_dbsm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psbr_plate_rcs(
    side_m: f64,
    theta_deg: f64,
    phi_deg: f64,
    frequency_hz: f64,
    out_dbsm: *mut f64,
) -> PsbrStatus {
    guard(|| {
        let p = params(frequency_hz)?;
        let scene = MeshScene::new(&shapes::plate(side_m)?)?;
        let wave = p.wave(theta_deg, phi_deg)?;
        let rcs = reference_sbr_rcs(&scene, &wave, -wave.dir, 1, p.pitch())?;
        write_out(out_dbsm, rcs, "out_dbsm")
    })
}
