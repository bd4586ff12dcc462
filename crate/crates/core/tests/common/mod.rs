//! Independent reference computations shared by the integration suites and
//! the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeMap;

use graspmap::geometry::{
    render_depth, shapes, Camera, CameraIntrinsics, CameraPose, CameraView, TriangleMesh, Vec3,
};
use graspmap::handkin::{forward_kinematics, HandConfiguration, KinematicChain};
use graspmap::ingest::{BBox, IntentProposal, MaskImage, ProposalSet, Scene, ViewEntry};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smallest positive `t` with `‖o + t·d − c‖ = r`.
pub fn ray_sphere(origin: &Vec3, dir: &Vec3, center: &Vec3, r: f64) -> Option<f64> {
    let oc = origin - center;
    let a = dir.dot(dir);
    let b = 2.0 * oc.dot(dir);
    let c = oc.dot(&oc) - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
        .into_iter()
        .find(|t| *t > 0.0)
}

/// Generalized winding number by summing signed solid angles
/// (Van Oosterom–Strackee) over every triangle.
pub fn winding_number(mesh: &TriangleMesh, p: &Vec3) -> f64 {
    let v = mesh.vertices();
    let mut total = 0.0;
    for t in mesh.triangles() {
        let a = v[t[0] as usize] - p;
        let b = v[t[1] as usize] - p;
        let c = v[t[2] as usize] - p;
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Brute-force nearest distance to any triangle (closest point by region
/// classification on each triangle).
pub fn brute_distance(mesh: &TriangleMesh, p: &Vec3) -> f64 {
    let v = mesh.vertices();
    mesh.triangles()
        .iter()
        .map(|t| point_triangle_distance(p, &v[t[0] as usize], &v[t[1] as usize], &v[t[2] as usize]))
        .fold(f64::INFINITY, f64::min)
}

fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub fn point_triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let n = (b - a).cross(&(c - a));
    let nn = n.norm_squared();
    if nn > 0.0 {
        // barycentric coordinates of the plane projection
        let q = p - n * ((p - a).dot(&n) / nn);
        let u = (b - q).cross(&(c - q)).dot(&n) / nn;
        let w = (c - q).cross(&(a - q)).dot(&n) / nn;
        let x = 1.0 - u - w;
        if u >= 0.0 && w >= 0.0 && x >= 0.0 {
            return (p - q).norm();
        }
    }
    point_segment_distance(p, a, b)
        .min(point_segment_distance(p, b, c))
        .min(point_segment_distance(p, c, a))
}

/// Dense λ sweep: every one of `samples` interior points must be inside the
/// volume or within `tol` of its surface.
pub fn sweep_inside(mesh: &TriangleMesh, a: &Vec3, b: &Vec3, samples: usize, tol: f64) -> bool {
    (1..=samples).all(|i| {
        let lambda = i as f64 / (samples + 1) as f64;
        let p = a * (1.0 - lambda) + b * lambda;
        mesh.contains_point(&p).unwrap() || mesh.unsigned_distance(&p).unwrap() <= tol
    })
}

/// Tip of the two-link planar test finger (links 0.04 and 0.03, both
/// joints about +z) with the wrist at the origin.
pub fn planar_tip(q1: f64, q2: f64) -> Vec3 {
    Vec3::new(
        0.04 * q1.cos() + 0.03 * (q1 + q2).cos(),
        0.04 * q1.sin() + 0.03 * (q1 + q2).sin(),
        0.0,
    )
}

/// Central differences of the stacked fingertip positions.
pub fn fd_jacobian(chain: &KinematicChain, h: &HandConfiguration, step: f64) -> DMatrix<f64> {
    let x0 = h.to_vector();
    let rows = 3 * chain.finger_count();
    let mut jac = DMatrix::zeros(rows, x0.len());
    for col in 0..x0.len() {
        let eval = |delta: f64| {
            let mut x = x0.clone();
            x[col] += delta;
            forward_kinematics(chain, &HandConfiguration::from_vector(&x)).unwrap()
        };
        let (plus, minus) = (eval(step), eval(-step));
        for f in 0..chain.finger_count() {
            let d = (plus[f] - minus[f]) / (2.0 * step);
            for k in 0..3 {
                jac[(3 * f + k, col)] = d[k];
            }
        }
    }
    jac
}

/// Random pose with the rotation angle below π − 0.1 and joints inside
/// their limits.
pub fn random_configuration(chain: &KinematicChain, rng: &mut ChaCha8Rng) -> HandConfiguration {
    let w = Vec3::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
    let axis = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        .try_normalize(1e-9)
        .unwrap_or_else(Vec3::z);
    let phi = axis * rng.gen_range(0.0..std::f64::consts::PI - 0.1);
    let theta = chain.limits().iter().map(|[lo, hi]| rng.gen_range(*lo..=*hi)).collect();
    HandConfiguration::new(w, phi, theta)
}

pub const SPHERE_RADIUS: f64 = 0.05;

pub fn sphere_mesh() -> TriangleMesh {
    shapes::icosphere(SPHERE_RADIUS, 3)
}

/// Camera at `eye` looking at the origin with +Z up.
pub fn camera_at(eye: Vec3, resolution: usize) -> Camera {
    let k = CameraIntrinsics::from_fov(resolution, resolution, 40f64.to_radians()).unwrap();
    Camera::new(k, CameraPose::look_at(eye, Vec3::zeros(), Vec3::z()).unwrap()).unwrap()
}

pub fn rendered_view(view_id: usize, mesh: &TriangleMesh, camera: Camera) -> CameraView {
    let depth = render_depth(mesh, &camera);
    CameraView::new(view_id, camera, Some(depth)).unwrap()
}

/// Two views of the sphere, from +X and from +Y, 0.35 m away.
pub fn two_view_sphere(resolution: usize) -> (TriangleMesh, Vec<CameraView>) {
    let mesh = sphere_mesh();
    let views = vec![
        rendered_view(0, &mesh, camera_at(Vec3::new(0.35, 0.0, 0.0), resolution)),
        rendered_view(1, &mesh, camera_at(Vec3::new(0.0, 0.35, 0.0), resolution)),
    ];
    (mesh, views)
}

/// Tight box on pixel edges around the mask.
pub fn mask_box(mask: &MaskImage) -> BBox {
    let (mut c0, mut r0, mut c1, mut r1) = (usize::MAX, usize::MAX, 0, 0);
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if mask.get(c, r) {
                c0 = c0.min(c);
                r0 = r0.min(r);
                c1 = c1.max(c);
                r1 = r1.max(r);
            }
        }
    }
    BBox::new(c0 as f64, r0 as f64, c1 as f64 + 1.0, r1 as f64 + 1.0)
}

/// Scene with one intent whose masks are the full silhouettes.
pub fn silhouette_scene(mesh: TriangleMesh, views: Vec<CameraView>, confidence: f64) -> Scene {
    let mut masks = BTreeMap::new();
    let mut entries = Vec::new();
    for v in &views {
        let mask = MaskImage::from_depth(v.depth().unwrap());
        entries.push(ViewEntry {
            view_id: v.view_id,
            visible: true,
            bbox: mask_box(&mask),
            confidence,
        });
        masks.insert((v.view_id, 0), mask);
    }
    let proposals = ProposalSet {
        object_id: "fixture".into(),
        intents: vec![IntentProposal {
            intent_id: 0,
            part_name: "body".into(),
            description: String::new(),
            views: entries,
        }],
        warnings: Vec::new(),
    };
    Scene::new(mesh, views, proposals, masks).unwrap()
}

pub mod episodes {
    use graspmap::geometry::Vec3;
    use graspmap::handkin::HandConfiguration;
    use graspmap::reward::{EpisodeLog, SimStateSnapshot};
    use graspmap::sgcr::ContactMap;

    pub const STEPS: usize = 30;

    pub fn goal() -> Vec3 {
        Vec3::new(0.0, 0.0, 0.3)
    }

    /// Object offset from the goal along +x by `distances[t]`; the final
    /// snapshot carries `contacts` and the final joints are `theta`.
    pub fn log(name: &str, distances: &[f64], theta: [f64; 2], contacts: Vec<Vec3>) -> EpisodeLog {
        let n = distances.len();
        let snapshots = distances
            .iter()
            .enumerate()
            .map(|(t, &d)| {
                let hand = HandConfiguration::new(Vec3::zeros(), Vec3::zeros(), theta.to_vec());
                SimStateSnapshot {
                    t: t as u64,
                    intent_id: Some(0),
                    reference: hand.clone(),
                    hand,
                    fingertips: vec![Vec3::zeros()],
                    object: goal() + Vec3::new(d, 0.0, 0.0),
                    goal: goal(),
                    contacts: (t + 1 == n).then(|| contacts.clone()),
                    hand_surface: None,
                }
            })
            .collect();
        EpisodeLog::new(name, snapshots).unwrap()
    }

    /// `near` for steps in `[start, start + len)`, `far` elsewhere.
    pub fn run(start: usize, len: usize, near: f64) -> Vec<f64> {
        (0..STEPS)
            .map(|t| if t >= start && t < start + len { near } else { 0.2 })
            .collect()
    }

    pub fn contacts_at(ds: &[f64]) -> Vec<Vec3> {
        ds.iter().map(|&d| Vec3::new(d, 0.0, 0.0)).collect()
    }

    /// Single map point at the origin, so SAD is the contact's |x|.
    pub fn origin_map() -> ContactMap {
        ContactMap {
            intent_id: 0,
            points: vec![Vec3::zeros()],
            scores: vec![1.0],
            seed_indices: vec![0],
        }
    }

    /// Ten episodes around the success and intent boundaries.
    ///
    /// | log | outcome | SAD | final θ |
    /// |-----|---------|-----|---------|
    /// | 0 | held all 30 steps | 0 | [0, 0] |
    /// | 1 | held exactly 20 steps at 0.049 m | 0.02 | [1, 0] |
    /// | 2 | held 19 steps | | |
    /// | 3 | exactly 0.05 m throughout | | |
    /// | 4 | success | mean(0.02, 0.04) | [2, 0] |
    /// | 5 | success | 0.039 | [3, 0] |
    /// | 6 | success | 0.04 | [4, 0] |
    /// | 7 | success, earlier closer contacts | 0.05 | [5, 0] |
    /// | 8 | runs of 15 and 14 split by one far step | | |
    /// | 9 | never near | | |
    pub fn boundary_logs() -> Vec<EpisodeLog> {
        let fail = [9.0, 9.0];
        let mut split = run(0, STEPS, 0.0);
        split[15] = 0.2;
        let mut l7 = log("l7", &run(0, STEPS, 0.01), [5.0, 0.0], contacts_at(&[0.05]));
        l7.snapshots[3].contacts = Some(contacts_at(&[0.0]));
        vec![
            log("l0", &run(0, STEPS, 0.0), [0.0, 0.0], contacts_at(&[0.0])),
            log("l1", &run(10, 20, 0.049), [1.0, 0.0], contacts_at(&[0.02])),
            log("l2", &run(5, 19, 0.0), fail, contacts_at(&[0.0])),
            log("l3", &run(0, STEPS, 0.05), fail, contacts_at(&[0.0])),
            log("l4", &run(2, 25, 0.03), [2.0, 0.0], contacts_at(&[0.02, 0.04])),
            log("l5", &run(0, STEPS, 0.0), [3.0, 0.0], contacts_at(&[0.039])),
            log("l6", &run(0, STEPS, 0.0), [4.0, 0.0], contacts_at(&[0.04])),
            l7,
            log("l8", &split, fail, contacts_at(&[0.0])),
            log("l9", &run(0, 0, 0.0), fail, contacts_at(&[0.0])),
        ]
    }

    fn sorted_mean(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        v.iter().sum::<f64>() / n
    }

    pub const EXPECTED_GSR: f64 = 0.6;
    pub const EXPECTED_ISR: f64 = 0.4;

    pub fn expected_msad() -> f64 {
        sorted_mean(vec![0.0, 0.02, sorted_mean(vec![0.02, 0.04]), 0.039, 0.04, 0.05])
    }

    /// Final joints 0..=5 along one axis: pairwise gaps sum to 35 over 15 pairs.
    pub fn expected_sd() -> f64 {
        35.0 / 15.0
    }
}
