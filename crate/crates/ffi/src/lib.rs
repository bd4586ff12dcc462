//! C ABI over graspmap.
//!
//! Objects are opaque handles created by `gm_*_load`/`gm_*_builtin` and
//! released with the matching `gm_*_free`. Every fallible call returns a
//! [`GmStatus`]; on failure [`gm_last_error`] describes what went wrong on
//! the calling thread. Vectors are `double[3]` in meters, rotations are
//! axis-angle vectors in radians.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use graspmap::cli::{load_bundle, render_outputs, run_pipeline, write_outputs, PipelineConfig};
use graspmap::geometry::io::read_obj;
use graspmap::geometry::{TriangleMesh, Vec3};
use graspmap::handkin::{
    forward_kinematics, load_chain, partition_regions, solve_ik, HandConfiguration, IkParams, KinematicChain,
    TargetMode, ThumbSide,
};
use graspmap::reward::{self, RewardConfig};
use graspmap::sgcr::io::read_contact_map;
use graspmap::sgcr::ContactMap;
use graspmap::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Topology = 5,
    Geometry = 6,
    Kinematics = 7,
    Numeric = 8,
    Bundle = 9,
    Pipeline = 10,
    BufferTooSmall = 11,
    Panic = 99,
}

/// Triangle mesh with its acceleration structure.
pub struct GmMesh(TriangleMesh);

/// Hand kinematic chain.
pub struct GmChain(KinematicChain);

/// Refined contact map for one intent.
pub struct GmContactMap(ContactMap);

/// Weights of the pose and contact rewards.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmRewardParams {
    pub lambda_w: f64,
    pub lambda_phi: f64,
    pub lambda_theta: f64,
    pub beta: f64,
    pub beta_c: f64,
    pub kappa_horizon: f64,
    pub kappa_floor: f64,
}

/// Damped least-squares solver settings.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmIkParams {
    pub iterations: u32,
    pub lambda_dls: f64,
    pub eta: f64,
    /// Keep the first targets instead of reselecting them every iteration.
    pub fixed_targets: bool,
    pub lock_wrist: bool,
    /// 0: thumb takes the upper half of the principal axis, 1: the lower half.
    pub thumb_side: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> GmStatus {
    match err {
        Error::Io { .. } => GmStatus::Io,
        Error::Parse { .. } => GmStatus::Parse,
        Error::Topology(_) | Error::InvalidMesh(_) => GmStatus::Topology,
        Error::InvalidDepth(_)
        | Error::OutOfBounds { .. }
        | Error::BehindCamera(_)
        | Error::InvalidCamera(_)
        | Error::DegenerateGeometry(_)
        | Error::DegenerateBox(..) => GmStatus::Geometry,
        Error::InvalidChain(_) | Error::Assignment(_) => GmStatus::Kinematics,
        Error::Numeric(_) => GmStatus::Numeric,
        Error::Bundle(_) | Error::MissingMask { .. } | Error::MissingDepth(_) => GmStatus::Bundle,
        Error::Stage { .. } => GmStatus::Pipeline,
        _ => GmStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and panics for [`gm_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (GmStatus, String)>) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GmStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            GmStatus::Panic
        }
    }
}

type Fallible<T> = Result<T, (GmStatus, String)>;

fn lib<T>(r: graspmap::Result<T>) -> Fallible<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (GmStatus, String) {
    (GmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Fallible<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Fallible<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn vec3(p: *const f64, what: &str) -> Fallible<Vec3> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok(Vec3::new(s[0], s[1], s[2]))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Fallible<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text(p: *const c_char, what: &str) -> Fallible<String> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (GmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write_vec3(dst: *mut f64, v: &Vec3) {
    std::slice::from_raw_parts_mut(dst, 3).copy_from_slice(v.as_slice());
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or "" after a success.
/// Valid until the next `gm_*` call on the same thread.
#[no_mangle]
pub extern "C" fn gm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a triangulated OBJ file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gm_mesh_load_obj(path: *const c_char, out_mesh: *mut *mut GmMesh) -> GmStatus {
    guard(|| {
        let dst = out(out_mesh, "out_mesh")?;
        *dst = ptr::null_mut();
        let path = PathBuf::from(text(path, "path")?);
        let mesh = lib(read_obj(&path))?;
        *dst = Box::into_raw(Box::new(GmMesh(mesh)));
        Ok(())
    })
}

/// Builds a mesh from `vertex_count` xyz triples and `triangle_count` index
/// triples.
///
/// # Safety
/// The arrays must hold `3 * count` elements.
#[no_mangle]
pub unsafe extern "C" fn gm_mesh_new(
    vertices: *const f64,
    vertex_count: usize,
    triangles: *const u32,
    triangle_count: usize,
    out_mesh: *mut *mut GmMesh,
) -> GmStatus {
    guard(|| {
        let dst = out(out_mesh, "out_mesh")?;
        *dst = ptr::null_mut();
        let v = slice(vertices, 3 * vertex_count, "vertices")?;
        if triangle_count > 0 && triangles.is_null() {
            return Err(null("triangles"));
        }
        let t = if triangle_count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(triangles, 3 * triangle_count)
        };
        let verts = v.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        let tris = t.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let mesh = lib(TriangleMesh::new(verts, tris))?;
        *dst = Box::into_raw(Box::new(GmMesh(mesh)));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from a `gm_mesh_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gm_mesh_free(mesh: *mut GmMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gm_mesh_is_watertight(mesh: *const GmMesh) -> bool {
    mesh.as_ref().is_some_and(|m| m.0.is_watertight())
}

/// Whether `point` lies inside the closed mesh.
///
/// # Safety
/// Pointers must be valid; `point` holds 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn gm_mesh_contains(mesh: *const GmMesh, point: *const f64, out_inside: *mut bool) -> GmStatus {
    guard(|| {
        let m = deref(mesh, "mesh")?;
        let p = vec3(point, "point")?;
        *out(out_inside, "out_inside")? = lib(m.0.contains_point(&p))?;
        Ok(())
    })
}

/// Signed distance to the surface, negative inside.
///
/// # Safety
/// Pointers must be valid; `point` holds 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn gm_mesh_signed_distance(
    mesh: *const GmMesh,
    point: *const f64,
    out_distance: *mut f64,
) -> GmStatus {
    guard(|| {
        let m = deref(mesh, "mesh")?;
        let p = vec3(point, "point")?;
        *out(out_distance, "out_distance")? = lib(m.0.signed_distance(&p))?;
        Ok(())
    })
}

/// Whether the segment `a`–`b` stays inside the volume at `samples`
/// interior points; points within `surface_tol` of the surface count as inside.
///
/// # Safety
/// Pointers must be valid; `a` and `b` hold 3 doubles each.
#[no_mangle]
pub unsafe extern "C" fn gm_mesh_segment_inside(
    mesh: *const GmMesh,
    a: *const f64,
    b: *const f64,
    samples: usize,
    surface_tol: f64,
    out_inside: *mut bool,
) -> GmStatus {
    guard(|| {
        let m = deref(mesh, "mesh")?;
        let (a, b) = (vec3(a, "a")?, vec3(b, "b")?);
        *out(out_inside, "out_inside")? = lib(m.0.segment_inside(&a, &b, samples, surface_tol))?;
        Ok(())
    })
}

/// Built-in chain: "shadow", "allegro", or "planar".
///
/// # Safety
/// `name` must be NUL-terminated and `out_chain` valid.
#[no_mangle]
pub unsafe extern "C" fn gm_chain_builtin(name: *const c_char, out_chain: *mut *mut GmChain) -> GmStatus {
    guard(|| {
        let dst = out(out_chain, "out_chain")?;
        *dst = ptr::null_mut();
        let name = text(name, "name")?;
        let chain = lib(load_chain(&format!("builtin:{name}")))?;
        *dst = Box::into_raw(Box::new(GmChain(chain)));
        Ok(())
    })
}

/// Chain from a JSON chain document, or `builtin:<name>`.
///
/// # Safety
/// `path` must be NUL-terminated and `out_chain` valid.
#[no_mangle]
pub unsafe extern "C" fn gm_chain_load(path: *const c_char, out_chain: *mut *mut GmChain) -> GmStatus {
    guard(|| {
        let dst = out(out_chain, "out_chain")?;
        *dst = ptr::null_mut();
        let chain = lib(load_chain(&text(path, "path")?))?;
        *dst = Box::into_raw(Box::new(GmChain(chain)));
        Ok(())
    })
}

/// # Safety
/// `chain` must come from a `gm_chain_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gm_chain_free(chain: *mut GmChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of actuated joints, or 0 for a null handle.
///
/// # Safety
/// `chain` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gm_chain_dof(chain: *const GmChain) -> usize {
    chain.as_ref().map_or(0, |c| c.0.dof())
}

/// Number of fingertips, or 0 for a null handle.
///
/// # Safety
/// `chain` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gm_chain_finger_count(chain: *const GmChain) -> usize {
    chain.as_ref().map_or(0, |c| c.0.finger_count())
}

unsafe fn configuration(w: *const f64, phi: *const f64, theta: *const f64, dof: usize) -> Fallible<HandConfiguration> {
    Ok(HandConfiguration::new(
        vec3(w, "w")?,
        vec3(phi, "phi")?,
        slice(theta, dof, "theta")?.to_vec(),
    ))
}

/// World fingertip positions, `3 * finger_count` doubles written to `out_tips`.
///
/// # Safety
/// `w` and `phi` hold 3 doubles, `theta` holds `dof`, and `out_tips` has room
/// for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gm_chain_forward_kinematics(
    chain: *const GmChain,
    w: *const f64,
    phi: *const f64,
    theta: *const f64,
    dof: usize,
    out_tips: *mut f64,
    out_len: usize,
) -> GmStatus {
    guard(|| {
        let c = deref(chain, "chain")?;
        let h = configuration(w, phi, theta, dof)?;
        let tips = lib(forward_kinematics(&c.0, &h))?;
        write_points(&tips, out_tips, out_len)
    })
}

unsafe fn write_points(points: &[Vec3], dst: *mut f64, len: usize) -> Fallible<()> {
    if len < 3 * points.len() {
        return Err((
            GmStatus::BufferTooSmall,
            format!("need {} doubles, buffer holds {len}", 3 * points.len()),
        ));
    }
    if points.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(null("output buffer"));
    }
    for (i, p) in points.iter().enumerate() {
        write_vec3(dst.add(3 * i), p);
    }
    Ok(())
}

/// Reads a contact map JSON document.
///
/// # Safety
/// `path` must be NUL-terminated and `out_map` valid.
#[no_mangle]
pub unsafe extern "C" fn gm_contact_map_load(path: *const c_char, out_map: *mut *mut GmContactMap) -> GmStatus {
    guard(|| {
        let dst = out(out_map, "out_map")?;
        *dst = ptr::null_mut();
        let path = PathBuf::from(text(path, "path")?);
        let map = lib(read_contact_map(&path))?;
        *dst = Box::into_raw(Box::new(GmContactMap(map)));
        Ok(())
    })
}

/// Contact map from `count` xyz points, all with score 1 and all seeds.
///
/// # Safety
/// `points` holds `3 * count` doubles.
#[no_mangle]
pub unsafe extern "C" fn gm_contact_map_new(
    intent_id: usize,
    points: *const f64,
    count: usize,
    out_map: *mut *mut GmContactMap,
) -> GmStatus {
    guard(|| {
        let dst = out(out_map, "out_map")?;
        *dst = ptr::null_mut();
        let pts: Vec<Vec3> = slice(points, 3 * count, "points")?
            .chunks_exact(3)
            .map(|c| Vec3::new(c[0], c[1], c[2]))
            .collect();
        let map = ContactMap {
            intent_id,
            scores: vec![1.0; pts.len()],
            seed_indices: (0..pts.len()).collect(),
            points: pts,
        };
        *dst = Box::into_raw(Box::new(GmContactMap(map)));
        Ok(())
    })
}

/// # Safety
/// `map` must come from a `gm_contact_map_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gm_contact_map_free(map: *mut GmContactMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `map` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gm_contact_map_len(map: *const GmContactMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.len())
}

/// Copies the points, `3 * len` doubles, into `out_points`.
///
/// # Safety
/// `out_points` has room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gm_contact_map_points(map: *const GmContactMap, out_points: *mut f64, out_len: usize) -> GmStatus {
    guard(|| {
        let m = deref(map, "map")?;
        write_points(&m.0.points, out_points, out_len)
    })
}

#[no_mangle]
pub extern "C" fn gm_ik_params_default() -> GmIkParams {
    let d = IkParams::default();
    GmIkParams {
        iterations: d.iterations as u32,
        lambda_dls: d.lambda_dls,
        eta: d.eta,
        fixed_targets: d.targets == TargetMode::Fixed,
        lock_wrist: d.lock_wrist,
        thumb_side: 0,
    }
}

/// Partitions `map` among the fingers and runs damped least-squares IK from
/// the given initial pose. `w`, `phi`, and `theta` are overwritten with the
/// result; `out_objective`, when not null, receives the final objective.
/// `params` may be null for defaults.
///
/// # Safety
/// `w` and `phi` hold 3 doubles; `theta` holds `dof`.
#[no_mangle]
pub unsafe extern "C" fn gm_solve_ik(
    chain: *const GmChain,
    map: *const GmContactMap,
    params: *const GmIkParams,
    w: *mut f64,
    phi: *mut f64,
    theta: *mut f64,
    dof: usize,
    out_objective: *mut f64,
) -> GmStatus {
    guard(|| {
        let c = deref(chain, "chain")?;
        let m = deref(map, "map")?;
        let p = params.as_ref().copied().unwrap_or_else(|| gm_ik_params_default());
        let side = match p.thumb_side {
            0 => ThumbSide::Positive,
            1 => ThumbSide::Negative,
            s => return Err((GmStatus::InvalidArgument, format!("thumb_side must be 0 or 1, got {s}"))),
        };
        let ik = IkParams {
            iterations: p.iterations as usize,
            lambda_dls: p.lambda_dls,
            eta: p.eta,
            targets: if p.fixed_targets { TargetMode::Fixed } else { TargetMode::Reselect },
            lock_wrist: p.lock_wrist,
        };
        let h0 = configuration(w, phi, theta, dof)?;
        let assignment = lib(partition_regions(&m.0.points, &c.0, side))?;
        let result = lib(solve_ik(&c.0, &h0, &assignment, &ik))?;
        write_vec3(w, &result.pose.w);
        write_vec3(phi, &result.pose.phi);
        if dof > 0 {
            std::slice::from_raw_parts_mut(theta, dof).copy_from_slice(&result.pose.theta);
        }
        if let Some(o) = out_objective.as_mut() {
            *o = *result.trace.last().expect("trace is non-empty");
        }
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn gm_reward_params_default() -> GmRewardParams {
    params_of(&RewardConfig::default())
}

fn params_of(c: &RewardConfig) -> GmRewardParams {
    GmRewardParams {
        lambda_w: c.lambda_w,
        lambda_phi: c.lambda_phi,
        lambda_theta: c.lambda_theta,
        beta: c.beta,
        beta_c: c.beta_c,
        kappa_horizon: c.kappa_horizon,
        kappa_floor: c.kappa_floor,
    }
}

unsafe fn reward_config(p: *const GmRewardParams) -> RewardConfig {
    let mut c = RewardConfig::default();
    if let Some(p) = p.as_ref() {
        c.lambda_w = p.lambda_w;
        c.lambda_phi = p.lambda_phi;
        c.lambda_theta = p.lambda_theta;
        c.beta = p.beta;
        c.beta_c = p.beta_c;
        c.kappa_horizon = p.kappa_horizon;
        c.kappa_floor = p.kappa_floor;
    }
    c
}

/// Tracking score from wrist offset, rotation error, and joint errors.
/// `params` may be null for defaults.
///
/// # Safety
/// `dw` and `dphi` hold 3 doubles; `dtheta` holds `dof`.
#[no_mangle]
pub unsafe extern "C" fn gm_track_score(
    params: *const GmRewardParams,
    dw: *const f64,
    dphi: *const f64,
    dtheta: *const f64,
    dof: usize,
    out_score: *mut f64,
) -> GmStatus {
    guard(|| {
        let cfg = reward_config(params);
        let (dw, dphi) = (vec3(dw, "dw")?, vec3(dphi, "dphi")?);
        let dtheta = slice(dtheta, dof, "dtheta")?;
        *out(out_score, "out_score")? = reward::track_score(&dw, &dphi, dtheta, &cfg);
        Ok(())
    })
}

/// Pose-guidance weight at step `t`. `params` may be null for defaults.
///
/// # Safety
/// `params` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn gm_kappa(params: *const GmRewardParams, t: f64) -> f64 {
    reward::kappa(t, &reward_config(params))
}

/// # Safety
/// `params` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn gm_pose_reward(params: *const GmRewardParams, t: f64, r_track: f64) -> f64 {
    reward::pose_reward(t, r_track, &reward_config(params))
}

/// # Safety
/// `params` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn gm_contact_reward(params: *const GmRewardParams, contact: bool, r_track: f64) -> f64 {
    reward::contact_reward(contact, r_track, &reward_config(params))
}

/// Validates a scene bundle, runs every intent, and writes the outputs into
/// `out_dir`. `config_path` may be null for defaults.
///
/// # Safety
/// String arguments must be NUL-terminated or (for `config_path`) null.
#[no_mangle]
pub unsafe extern "C" fn gm_run_bundle(
    bundle_dir: *const c_char,
    out_dir: *const c_char,
    config_path: *const c_char,
) -> GmStatus {
    guard(|| {
        let bundle = PathBuf::from(text(bundle_dir, "bundle_dir")?);
        let out_dir = PathBuf::from(text(out_dir, "out_dir")?);
        let cfg = if config_path.is_null() {
            PipelineConfig::default()
        } else {
            lib(PipelineConfig::read(&PathBuf::from(text(config_path, "config_path")?)))?
        };
        let scene = lib(load_bundle(&bundle))?;
        let results = lib(run_pipeline(&scene, &cfg, None))?;
        lib(write_outputs(&out_dir, &render_outputs(&results, &scene.proposals.warnings)))?;
        Ok(())
    })
}
