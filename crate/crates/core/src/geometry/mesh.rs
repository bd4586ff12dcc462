//! Triangle meshes and the volume queries the refinement stage relies on:
//! point containment, signed distance, and segment-inside tests.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bvh::Bvh;
use super::camera::Vec3;
use crate::error::{Error, Result};

/// How [`TriangleMesh::contains_point_with`] decides membership.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsideTest {
    /// Crossing parity along a fixed direction, re-cast along the next
    /// direction when a hit grazes an edge or vertex.
    #[default]
    RayParity,
    /// Generalized winding number over all triangles, threshold 0.5.
    WindingNumber,
}

// Fixed, irrational-looking directions; the first one is used unless a hit
// grazes an edge or vertex.
const RAY_DIRECTIONS: [[f64; 3]; 6] = [
    [0.328_153_1, 0.791_802_9, 0.515_179_7],
    [-0.617_243_8, 0.235_915_4, 0.750_568_2],
    [0.452_318_7, -0.869_040_3, 0.200_481_9],
    [-0.184_559_1, -0.397_720_6, -0.898_763_5],
    [0.905_213_3, 0.174_108_2, -0.387_659_4],
    [-0.701_007_6, -0.652_148_0, 0.288_512_1],
];

const GRAZE_EPS: f64 = 1e-9;

/// Indexed triangle mesh. Watertightness is computed once at construction.
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    watertight: bool,
    bounds: Option<(Vec3, Vec3)>,
    bvh: OnceLock<Bvh>,
}

impl Clone for TriangleMesh {
    fn clone(&self) -> Self {
        Self::from_parts(self.vertices.clone(), self.triangles.clone(), self.watertight)
    }
}

impl std::fmt::Debug for TriangleMesh {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TriangleMesh")
            .field("vertices", &self.vertices.len())
            .field("triangles", &self.triangles.len())
            .field("watertight", &self.watertight)
            .finish()
    }
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len();
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("non-finite vertex {v:?}")));
        }
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&k| k as usize >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {i} references a vertex outside 0..{n}"
                )));
            }
        }
        let watertight = edges_are_manifold(&triangles);
        Ok(Self::from_parts(vertices, triangles, watertight))
    }

    fn from_parts(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>, watertight: bool) -> Self {
        let bounds = vertices.first().map(|&first| {
            vertices
                .iter()
                .fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v)))
        });
        Self {
            vertices,
            triangles,
            watertight,
            bounds,
            bvh: OnceLock::new(),
        }
    }

    pub fn empty() -> Self {
        Self::from_parts(Vec::new(), Vec::new(), true)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_watertight(&self) -> bool {
        self.watertight
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, triangle: usize) -> [Vec3; 3] {
        let t = self.triangles[triangle];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn triangle_area(&self, triangle: usize) -> f64 {
        let [a, b, c] = self.corners(triangle);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Unit normal following the winding order (zero for degenerate faces).
    pub fn triangle_normal(&self, triangle: usize) -> Vec3 {
        let [a, b, c] = self.corners(triangle);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// Axis-aligned bounds `(min, max)`; `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        self.bounds
    }

    pub fn bounding_diagonal(&self) -> f64 {
        self.bounds().map_or(0.0, |(lo, hi)| (hi - lo).norm())
    }

    pub fn translated(&self, offset: &Vec3) -> Self {
        Self::from_parts(
            self.vertices.iter().map(|v| v + offset).collect(),
            self.triangles.clone(),
            self.watertight,
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(
            self.vertices.iter().map(|v| v * factor).collect(),
            self.triangles.clone(),
            self.watertight,
        )
    }

    pub(crate) fn bvh(&self) -> &Bvh {
        self.bvh
            .get_or_init(|| Bvh::build(&self.vertices, &self.triangles))
    }

    fn require_watertight(&self) -> Result<()> {
        if self.watertight {
            Ok(())
        } else {
            Err(Error::Topology(
                "some edge is not shared by exactly two triangles".into(),
            ))
        }
    }

    /// Membership in the enclosed volume using the default ray-parity test.
    pub fn contains_point(&self, point: &Vec3) -> Result<bool> {
        self.contains_point_with(point, InsideTest::RayParity)
    }

    pub fn contains_point_with(&self, point: &Vec3, method: InsideTest) -> Result<bool> {
        self.require_watertight()?;
        Ok(self.contains_unchecked(point, method))
    }

    fn contains_unchecked(&self, point: &Vec3, method: InsideTest) -> bool {
        if self.triangles.is_empty() {
            return false;
        }
        match method {
            InsideTest::WindingNumber => self.winding_number(point).abs() > 0.5,
            InsideTest::RayParity => {
                if let Some((lo, hi)) = self.bounds {
                    if (0..3).any(|k| point[k] < lo[k] || point[k] > hi[k]) {
                        return false;
                    }
                }
                for d in RAY_DIRECTIONS {
                    if let Some(inside) = self.ray_parity(point, &Vec3::new(d[0], d[1], d[2])) {
                        return inside;
                    }
                }
                self.winding_number(point).abs() > 0.5
            }
        }
    }

    /// Crossing parity along `dir`; `None` when a hit is too close to an
    /// edge or vertex to count reliably.
    fn ray_parity(&self, origin: &Vec3, dir: &Vec3) -> Option<bool> {
        let mut crossings = 0usize;
        let mut grazing = false;
        self.bvh().for_each_ray_hit(origin, dir, |hit| {
            if hit.min_bary < GRAZE_EPS {
                grazing = true;
            }
            crossings += 1;
        });
        (!grazing).then_some(crossings % 2 == 1)
    }

    /// Generalized winding number: total signed solid angle over 4π.
    pub fn winding_number(&self, point: &Vec3) -> f64 {
        let mut total = 0.0;
        for i in 0..self.triangles.len() {
            let [a, b, c] = self.corners(i);
            total += solid_angle(&(a - point), &(b - point), &(c - point));
        }
        total / (4.0 * std::f64::consts::PI)
    }

    /// Distance to the nearest triangle.
    pub fn unsigned_distance(&self, point: &Vec3) -> Result<f64> {
        self.bvh()
            .closest_point(point)
            .map(|(d2, _, _)| d2.sqrt())
            .ok_or(Error::EmptyInput("mesh has no triangles"))
    }

    /// Nearest surface point and the triangle it lies on.
    pub fn closest_point(&self, point: &Vec3) -> Result<(Vec3, usize)> {
        self.bvh()
            .closest_point(point)
            .map(|(_, q, t)| (q, t))
            .ok_or(Error::EmptyInput("mesh has no triangles"))
    }

    /// Negative inside, positive outside; magnitude is the distance to the
    /// nearest triangle.
    pub fn signed_distance(&self, point: &Vec3) -> Result<f64> {
        self.require_watertight()?;
        let d = self.unsigned_distance(point)?;
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok(if self.contains_unchecked(point, InsideTest::RayParity) {
            -d
        } else {
            d
        })
    }

    /// Whether the segment `q1`–`q2` stays in the volume: each of `samples`
    /// evenly spaced interior points must be inside or within `surface_tol`
    /// of the surface. Endpoints are not tested.
    pub fn segment_inside(&self, q1: &Vec3, q2: &Vec3, samples: usize, surface_tol: f64) -> Result<bool> {
        self.segment_inside_with(q1, q2, samples, surface_tol, InsideTest::RayParity)
    }

    pub fn segment_inside_with(
        &self,
        q1: &Vec3,
        q2: &Vec3,
        samples: usize,
        surface_tol: f64,
        method: InsideTest,
    ) -> Result<bool> {
        self.require_watertight()?;
        if samples < 2 {
            return Err(Error::InvalidConfig(format!(
                "segment test needs at least 2 samples, got {samples}"
            )));
        }
        if !(surface_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "surface tolerance must be non-negative, got {surface_tol}"
            )));
        }
        // middle-out order: exits are usually found near the middle
        let mut order: Vec<usize> = (1..=samples).collect();
        let mid = (samples + 1) as f64 / 2.0;
        order.sort_by(|a, b| {
            (*a as f64 - mid)
                .abs()
                .total_cmp(&(*b as f64 - mid).abs())
                .then(a.cmp(b))
        });
        let step = 1.0 / (samples + 1) as f64;
        for i in order {
            let lambda = i as f64 * step;
            let p = q1 * (1.0 - lambda) + q2 * lambda;
            if self.contains_unchecked(&p, method) {
                continue;
            }
            if self.unsigned_distance(&p)? <= surface_tol {
                continue;
            }
            return Ok(false);
        }
        Ok(true)
    }

    /// Area-weighted uniform samples on the surface; deterministic in `seed`.
    pub fn surface_sample(&self, n: usize, seed: u64) -> Result<Vec<Vec3>> {
        if self.triangles.is_empty() {
            return Err(Error::EmptyInput("cannot sample an empty mesh"));
        }
        if n == 0 {
            return Err(Error::EmptyInput("sample count must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.triangles.len());
        let mut total = 0.0;
        for i in 0..self.triangles.len() {
            total += self.triangle_area(i);
            cumulative.push(total);
        }
        if !(total > 0.0) {
            return Err(Error::DegenerateGeometry("mesh has zero surface area".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let pick = rng.gen::<f64>() * total;
            let tri = cumulative
                .partition_point(|&c| c <= pick)
                .min(self.triangles.len() - 1);
            let [a, b, c] = self.corners(tri);
            let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
            let s = r1.sqrt();
            out.push(a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2));
        }
        Ok(out)
    }
}

/// Signed solid angle of triangle `abc` seen from the origin
/// (Van Oosterom & Strackee).
fn solid_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let numer = a.dot(&b.cross(c));
    let denom = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    2.0 * numer.atan2(denom)
}

fn edges_are_manifold(triangles: &[[u32; 3]]) -> bool {
    let mut counts: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 3 / 2);
    for t in triangles {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return false;
        }
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    counts.values().all(|&c| c == 2)
}
