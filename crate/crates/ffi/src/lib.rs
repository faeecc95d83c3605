//! C interface to `ugrasp`.
//!
//! Every fallible function returns a [`UgraspStatus`]; on failure the
//! message is kept per thread and read with [`ugrasp_last_error`]. Objects
//! cross the boundary as opaque handles that the caller frees with the
//! matching `*_free` function. Poses are 7 doubles `px py pz qw qx qy qz`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use ugrasp::app::{grasp_list_json, infer_cloud, ModelArchive, RunConfig};
use ugrasp::geom::{theta, Pose};
use ugrasp::hand::HandDescription;
use ugrasp::surface::{extract_features, PointCloud, SurfaceFeatureSet};
use ugrasp::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UgraspStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or malformed.
    InvalidArgument = 2,
    /// A file could not be read or written.
    Io = 3,
    /// Input data was malformed or inconsistent.
    Data = 4,
    /// The learned models do not support the query.
    Degenerate = 5,
    /// An internal error; the library state is unchanged.
    Panic = 6,
}

/// A point cloud with its viewpoint.
pub struct UgraspCloud(PointCloud);

/// Surface features extracted from a cloud.
pub struct UgraspFeatures(SurfaceFeatureSet);

/// A hand description.
pub struct UgraspHand(HandDescription);

/// A trained model archive.
pub struct UgraspArchive(ModelArchive);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> UgraspStatus {
    match e {
        _ if e.is_degenerate() => UgraspStatus::Degenerate,
        Error::Io { .. } => UgraspStatus::Io,
        _ => UgraspStatus::Data,
    }
}

struct Failure(UgraspStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(UgraspStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> Failure {
    Failure(UgraspStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UgraspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UgraspStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            UgraspStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn pose_arg(p: *const f64, what: &str) -> Result<Pose, Failure> {
    let s = slice_arg(p, 7, what)?;
    Ok(Pose::from_array(s.try_into().expect("seven values"))?)
}

fn boxed<T>(out: &mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ugrasp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ugrasp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a cloud from `n_points` xyz triples.
///
/// # Safety
/// `xyz` must hold `3 * n_points` doubles and `viewpoint` 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_cloud_new(
    xyz: *const f64,
    n_points: usize,
    viewpoint: *const f64,
    out: *mut *mut UgraspCloud,
) -> UgraspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = n_points.checked_mul(3).ok_or_else(|| invalid("n_points overflows"))?;
        let coords = slice_arg(xyz, len, "xyz")?;
        let v = slice_arg(viewpoint, 3, "viewpoint")?;
        let points = coords.chunks_exact(3).map(|c| Vector3::new(c[0], c[1], c[2])).collect();
        let cloud = PointCloud::new(points, Vector3::new(v[0], v[1], v[2]))?;
        boxed(out, UgraspCloud(cloud));
        Ok(())
    })
}

/// Reads an ASCII PLY cloud.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_cloud_load(path: *const c_char, out: *mut *mut UgraspCloud) -> UgraspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cloud = PointCloud::load(str_arg(path, "path")?)?;
        boxed(out, UgraspCloud(cloud));
        Ok(())
    })
}

/// Number of points, or 0 for null.
///
/// # Safety
/// `cloud` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_cloud_len(cloud: *const UgraspCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `cloud` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_cloud_free(cloud: *mut UgraspCloud) {
    free(cloud)
}

/// Extracts one feature per point with a stable neighbourhood fit.
///
/// # Safety
/// `cloud` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_features_extract(
    cloud: *const UgraspCloud,
    k_nn: usize,
    out: *mut *mut UgraspFeatures,
) -> UgraspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cloud = borrow(cloud, "cloud")?;
        let ex = extract_features(&cloud.0, k_nn)?;
        boxed(out, UgraspFeatures(ex.features));
        Ok(())
    })
}

/// Number of features, or 0 for null.
///
/// # Safety
/// `features` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_features_len(features: *const UgraspFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.0.len())
}

/// Copies feature `index` into `pose` (7 doubles) and `curvature` (2).
///
/// # Safety
/// `pose` and `curvature` must have room for 7 and 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_features_get(
    features: *const UgraspFeatures,
    index: usize,
    pose: *mut f64,
    curvature: *mut f64,
) -> UgraspStatus {
    guard(|| {
        let features = borrow(features, "features")?;
        let f = features
            .0
            .features
            .get(index)
            .ok_or_else(|| invalid(format!("index {index} out of range for {} features", features.0.len())))?;
        if pose.is_null() {
            return Err(null("pose"));
        }
        if curvature.is_null() {
            return Err(null("curvature"));
        }
        std::slice::from_raw_parts_mut(pose, 7).copy_from_slice(&f.pose.to_array());
        std::slice::from_raw_parts_mut(curvature, 2).copy_from_slice(&f.curvature);
        Ok(())
    })
}

/// # Safety
/// `features` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_features_free(features: *mut UgraspFeatures) {
    free(features)
}

/// The built-in two-finger hand.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_hand_default(out: *mut *mut UgraspHand) -> UgraspStatus {
    guard(|| {
        boxed(out_ptr(out, "out")?, UgraspHand(HandDescription::default_two_finger()));
        Ok(())
    })
}

/// Reads a hand description JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_hand_load(path: *const c_char, out: *mut *mut UgraspHand) -> UgraspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let hand = HandDescription::load(str_arg(path, "path")?)?;
        boxed(out, UgraspHand(hand));
        Ok(())
    })
}

/// Number of links, or 0 for null.
///
/// # Safety
/// `hand` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_hand_num_links(hand: *const UgraspHand) -> usize {
    hand.as_ref().map_or(0, |h| h.0.num_links())
}

/// Number of joints, or 0 for null.
///
/// # Safety
/// `hand` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_hand_dof(hand: *const UgraspHand) -> usize {
    hand.as_ref().map_or(0, |h| h.0.dof())
}

/// World poses of every link, written as `7 * num_links` doubles.
///
/// # Safety
/// `wrist` must hold 7 doubles, `config` `n_config`, and `poses` `poses_len`.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_hand_forward_kinematics(
    hand: *const UgraspHand,
    wrist: *const f64,
    config: *const f64,
    n_config: usize,
    poses: *mut f64,
    poses_len: usize,
) -> UgraspStatus {
    guard(|| {
        let hand = &borrow(hand, "hand")?.0;
        let wrist = pose_arg(wrist, "wrist")?;
        let config = slice_arg(config, n_config, "config")?;
        let needed = 7 * hand.num_links();
        if poses_len < needed {
            return Err(invalid(format!("poses needs {needed} doubles, got {poses_len}")));
        }
        if poses.is_null() {
            return Err(null("poses"));
        }
        let out = std::slice::from_raw_parts_mut(poses, needed);
        for (chunk, pose) in out.chunks_exact_mut(7).zip(hand.forward_kinematics(&wrist, config)?) {
            chunk.copy_from_slice(&pose.to_array());
        }
        Ok(())
    })
}

/// # Safety
/// `hand` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_hand_free(hand: *mut UgraspHand) {
    free(hand)
}

/// Reads a model archive written by `ugrasp train`.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_archive_load(path: *const c_char, out: *mut *mut UgraspArchive) -> UgraspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let archive = ModelArchive::load(str_arg(path, "path")?)?;
        boxed(out, UgraspArchive(archive));
        Ok(())
    })
}

/// Number of grasp types, or 0 for null.
///
/// # Safety
/// `archive` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_archive_num_grasp_types(archive: *const UgraspArchive) -> usize {
    archive.as_ref().map_or(0, |a| a.0.grasp_types.len())
}

/// # Safety
/// `archive` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_archive_free(archive: *mut UgraspArchive) {
    free(archive)
}

/// Finds grasps on `cloud` and writes the best `top` as a JSON grasp list
/// to `out_json`, to be released with [`ugrasp_string_free`].
///
/// `config_json` may be null for defaults; `seed` overrides its seed.
///
/// # Safety
/// Handles must be live; `config_json` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_infer(
    archive: *const UgraspArchive,
    cloud: *const UgraspCloud,
    config_json: *const c_char,
    seed: u64,
    top: usize,
    out_json: *mut *mut c_char,
) -> UgraspStatus {
    guard(|| {
        let out = out_ptr(out_json, "out_json")?;
        let archive = &borrow(archive, "archive")?.0;
        let cloud = &borrow(cloud, "cloud")?.0;
        let config = if config_json.is_null() {
            RunConfig::default()
        } else {
            RunConfig::from_json_str(str_arg(config_json, "config_json")?)?
        };
        let result = infer_cloud(archive, cloud, &config, seed)?;
        let text = grasp_list_json(archive, &result, top);
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Antipodal von Mises-Fisher density of unit quaternion `q` (w x y z)
/// around `mean` with concentration `kappa`.
///
/// # Safety
/// `q` and `mean` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn ugrasp_theta(q: *const f64, mean: *const f64, kappa: f64, out: *mut f64) -> UgraspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let unit = |p: *const f64, what: &str| -> Result<UnitQuaternion<f64>, Failure> {
            let s = slice_arg(p, 4, what)?;
            let raw = Quaternion::new(s[0], s[1], s[2], s[3]);
            if !s.iter().all(|v| v.is_finite()) || (raw.norm() - 1.0).abs() > 1e-6 {
                return Err(invalid(format!("{what} is not a unit quaternion")));
            }
            Ok(UnitQuaternion::from_quaternion(raw))
        };
        let (q, mean) = (unit(q, "q")?, unit(mean, "mean")?);
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(invalid("kappa must be positive"));
        }
        *out = theta(&q, &mean, kappa);
        Ok(())
    })
}
