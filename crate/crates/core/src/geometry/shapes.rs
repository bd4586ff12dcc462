//! Procedural watertight meshes used by the synthetic scene generator and
//! the test suites. All meshes are centered on the origin with outward
//! winding.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::camera::Vec3;
use super::mesh::TriangleMesh;

/// Geodesic sphere: a subdivided icosahedron projected onto the sphere.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = ((vertices[a as usize] + vertices[b as usize]) * 0.5).normalize();
                vertices.push(m);
                (vertices.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = vertices.into_iter().map(|v| v * radius).collect();
    finish(vertices, faces)
}

/// Axis-aligned cube with edge length `size`, each face split into
/// `divisions`² quads.
pub fn cube(size: f64, divisions: usize) -> TriangleMesh {
    let n = divisions.max(1);
    let mut index: HashMap<(usize, usize, usize), u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vid = |i: usize, j: usize, k: usize, vertices: &mut Vec<Vec3>| -> u32 {
        *index.entry((i, j, k)).or_insert_with(|| {
            let s = |v: usize| (v as f64 / n as f64 - 0.5) * size;
            vertices.push(Vec3::new(s(i), s(j), s(k)));
            (vertices.len() - 1) as u32
        })
    };
    let mut faces = Vec::new();
    // each face: fixed axis and side, two free axes
    for axis in 0..3 {
        for side in [0, n] {
            for a in 0..n {
                for b in 0..n {
                    let at = |da: usize, db: usize| {
                        let mut c = [0usize; 3];
                        c[axis] = side;
                        c[(axis + 1) % 3] = a + da;
                        c[(axis + 2) % 3] = b + db;
                        c
                    };
                    let q: Vec<u32> = [at(0, 0), at(1, 0), at(1, 1), at(0, 1)]
                        .iter()
                        .map(|c| vid(c[0], c[1], c[2], &mut vertices))
                        .collect();
                    faces.push([q[0], q[1], q[2]]);
                    faces.push([q[0], q[2], q[3]]);
                }
            }
        }
    }
    // convex and centered: orient each face away from the origin
    for f in faces.iter_mut() {
        let (a, b, c) = (
            vertices[f[0] as usize],
            vertices[f[1] as usize],
            vertices[f[2] as usize],
        );
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            f.swap(1, 2);
        }
    }
    finish(vertices, faces)
}

/// Torus around the z axis.
pub fn torus(major: f64, minor: f64, major_segments: usize, minor_segments: usize) -> TriangleMesh {
    let (nu, nv) = (major_segments.max(3), minor_segments.max(3));
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            vertices.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| ((i % nu) * nv + (j % nv)) as u32;
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    finish(vertices, faces)
}

/// Cross-section of a tube at one station along x: circle center
/// `(x, center_y, 0)` and radius, in the plane perpendicular to x.
#[derive(Debug, Clone, Copy)]
pub struct TubeStation {
    pub x: f64,
    pub center_y: f64,
    pub radius: f64,
}

/// Closed tube through `stations` (increasing x, positive radii), capped
/// by single pole vertices at `start_x` and `end_x`.
pub fn tube(start_x: f64, end_x: f64, stations: &[TubeStation], segments: usize) -> TriangleMesh {
    let s = segments.max(3);
    let mut vertices = Vec::with_capacity(stations.len() * s + 2);
    let first_y = stations.first().map_or(0.0, |st| st.center_y);
    let last_y = stations.last().map_or(0.0, |st| st.center_y);
    vertices.push(Vec3::new(start_x, first_y, 0.0));
    for st in stations {
        for k in 0..s {
            let a = 2.0 * PI * k as f64 / s as f64;
            vertices.push(Vec3::new(
                st.x,
                st.center_y + st.radius * a.cos(),
                st.radius * a.sin(),
            ));
        }
    }
    vertices.push(Vec3::new(end_x, last_y, 0.0));
    let end_pole = (vertices.len() - 1) as u32;
    let ring = |i: usize, k: usize| (1 + i * s + (k % s)) as u32;
    let mut faces = Vec::new();
    for k in 0..s {
        faces.push([0, ring(0, k + 1), ring(0, k)]);
    }
    for i in 0..stations.len().saturating_sub(1) {
        for k in 0..s {
            let (a, b, c, d) = (ring(i, k), ring(i, k + 1), ring(i + 1, k + 1), ring(i + 1, k));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    let last = stations.len() - 1;
    for k in 0..s {
        faces.push([end_pole, ring(last, k), ring(last, k + 1)]);
    }
    finish(vertices, faces)
}

/// Geometry of the dumbbell fixture in units of the lobe radius.
pub mod dumbbell_params {
    /// Lobe centers sit at `(±LOBE_OFFSET, 0, 0)`.
    pub const LOBE_OFFSET: f64 = 1.6;
    pub const NECK_RADIUS: f64 = 0.25;
    /// The neck axis runs along `y = NECK_OFFSET`, away from the tip axis.
    pub const NECK_OFFSET: f64 = 0.6;
    pub const NECK_HALF_LENGTH: f64 = 0.5;
    pub const BLEND_END: f64 = 1.0;
}

/// Two spherical lobes joined by a thin neck that is offset from the
/// tip-to-tip axis, so the straight line between the tips leaves the solid.
pub fn dumbbell(lobe_radius: f64, rings: usize, segments: usize) -> TriangleMesh {
    use dumbbell_params::*;
    let rings = rings.max(4);
    let lobe = |ax: f64| (1.0 - (ax - LOBE_OFFSET).powi(2)).max(0.0).sqrt();
    let mut stations = Vec::new();
    // left lobe from the tip inward, parametrized by polar angle
    let alpha_end = (BLEND_END - LOBE_OFFSET).acos();
    let mut left = Vec::new();
    for i in 1..=rings {
        let alpha = alpha_end * i as f64 / rings as f64;
        left.push(TubeStation {
            x: -(LOBE_OFFSET + alpha.cos()),
            center_y: 0.0,
            radius: alpha.sin(),
        });
    }
    stations.extend(left.iter().copied());
    // blend and neck
    let middle = 2 * rings;
    for i in 1..middle {
        let x = -BLEND_END + 2.0 * BLEND_END * i as f64 / middle as f64;
        let ax = x.abs();
        let (center_y, radius) = if ax <= NECK_HALF_LENGTH {
            (NECK_OFFSET, NECK_RADIUS)
        } else {
            let s = ((ax - NECK_HALF_LENGTH) / (BLEND_END - NECK_HALF_LENGTH)).clamp(0.0, 1.0);
            let s = s * s * (3.0 - 2.0 * s);
            (NECK_OFFSET * (1.0 - s), NECK_RADIUS * (1.0 - s) + lobe(ax) * s)
        };
        stations.push(TubeStation { x, center_y, radius });
    }
    // right lobe mirrors the left
    stations.extend(left.iter().rev().map(|st| TubeStation {
        x: -st.x,
        ..*st
    }));
    let tip = LOBE_OFFSET + 1.0;
    let unit = tube(-tip, tip, &stations, segments);
    unit.scaled(lobe_radius)
}

/// Flips every face when the enclosed signed volume is negative.
fn finish(vertices: Vec<Vec3>, mut faces: Vec<[u32; 3]>) -> TriangleMesh {
    let volume: f64 = faces
        .iter()
        .map(|f| {
            let (a, b, c) = (
                vertices[f[0] as usize],
                vertices[f[1] as usize],
                vertices[f[2] as usize],
            );
            a.dot(&b.cross(&c)) / 6.0
        })
        .sum();
    if volume < 0.0 {
        for f in faces.iter_mut() {
            f.swap(1, 2);
        }
    }
    TriangleMesh::new(vertices, faces).expect("procedural mesh indices are in range")
}

/// Signed enclosed volume (positive for outward winding).
pub fn signed_volume(mesh: &TriangleMesh) -> f64 {
    (0..mesh.triangles().len())
        .map(|i| {
            let [a, b, c] = mesh.corners(i);
            a.dot(&b.cross(&c)) / 6.0
        })
        .sum()
}
