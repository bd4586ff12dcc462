//! Axis-aligned bounding volume hierarchy over mesh triangles. Internal
//! acceleration only; all queries return the same answers a linear scan would.

use super::camera::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&mut self, other: &Aabb) {
        self.min = self.min.inf(&other.min);
        self.max = self.max.sup(&other.max);
    }

    fn distance_squared(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d2 += v * v;
        }
        d2
    }

    /// Slab test; returns the entry parameter when the ray meets the box
    /// before `t_max`.
    fn ray_entry(&self, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            let a = (self.min[k] - origin[k]) * inv_dir[k];
            let b = (self.max[k] - origin[k]) * inv_dir[k];
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            // NaN from 0 * inf: the ray is parallel and on the slab boundary
            if near.is_nan() || far.is_nan() {
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            // small slack so that hits exactly on box faces are not lost
            if t0 > t1 * (1.0 + 1e-12) + 1e-12 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: first triangle slot; interior: index of the left child.
    start: usize,
    /// Leaf triangle count; zero marks an interior node whose right child
    /// is `start + 1`.
    count: usize,
    right: usize,
}

/// One ray–triangle intersection.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RayHit {
    pub triangle: usize,
    pub t: f64,
    /// Smallest barycentric coordinate; near zero means an edge or vertex hit.
    pub min_bary: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    /// Triangle corners in leaf order.
    tris: Vec<[Vec3; 3]>,
    /// Original triangle index for each leaf slot.
    ids: Vec<usize>,
}

impl Bvh {
    pub fn build(vertices: &[Vec3], triangles: &[[u32; 3]]) -> Self {
        let corners: Vec<[Vec3; 3]> = triangles
            .iter()
            .map(|t| {
                [
                    vertices[t[0] as usize],
                    vertices[t[1] as usize],
                    vertices[t[2] as usize],
                ]
            })
            .collect();
        let centroids: Vec<Vec3> = corners.iter().map(|c| (c[0] + c[1] + c[2]) / 3.0).collect();
        let mut ids: Vec<usize> = (0..triangles.len()).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1);
        if !ids.is_empty() {
            build_node(&mut nodes, &mut ids, 0, &corners, &centroids);
        }
        let tris = ids.iter().map(|&i| corners[i]).collect();
        Self { nodes, tris, ids }
    }

    /// Calls `visit` for every triangle the ray (from `origin`, any `t > 0`)
    /// passes through, in no particular order.
    pub fn for_each_ray_hit(&self, origin: &Vec3, dir: &Vec3, mut visit: impl FnMut(RayHit)) {
        if self.nodes.is_empty() {
            return;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds.ray_entry(origin, &inv, f64::INFINITY).is_none() {
                continue;
            }
            if node.count > 0 {
                for slot in node.start..node.start + node.count {
                    if let Some((t, min_bary)) = intersect(origin, dir, &self.tris[slot]) {
                        if t > 0.0 {
                            visit(RayHit {
                                triangle: self.ids[slot],
                                t,
                                min_bary,
                            });
                        }
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.right);
            }
        }
    }

    /// Nearest hit with `t > 0`; ties on `t` resolve to the lower triangle
    /// index so the result does not depend on traversal order.
    pub fn nearest_hit(&self, origin: &Vec3, dir: &Vec3) -> Option<RayHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<RayHit> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let t_max = best.map_or(f64::INFINITY, |b| b.t);
            if node.bounds.ray_entry(origin, &inv, t_max).is_none() {
                continue;
            }
            if node.count > 0 {
                for slot in node.start..node.start + node.count {
                    if let Some((t, min_bary)) = intersect(origin, dir, &self.tris[slot]) {
                        let id = self.ids[slot];
                        let better = match best {
                            None => true,
                            Some(b) => t < b.t || (t == b.t && id < b.triangle),
                        };
                        if t > 0.0 && better {
                            best = Some(RayHit {
                                triangle: id,
                                t,
                                min_bary,
                            });
                        }
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.right);
            }
        }
        best
    }

    /// Closest surface point to `p`: `(distance², point, triangle)`.
    pub fn closest_point(&self, p: &Vec3) -> Option<(f64, Vec3, usize)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(f64, Vec3, usize)> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let bound = best.map_or(f64::INFINITY, |b| b.0);
            if node.bounds.distance_squared(p) > bound {
                continue;
            }
            if node.count > 0 {
                for slot in node.start..node.start + node.count {
                    let [a, b, c] = &self.tris[slot];
                    let q = closest_point_on_triangle(p, a, b, c);
                    let d2 = (q - p).norm_squared();
                    let id = self.ids[slot];
                    let better = match best {
                        None => true,
                        Some((bd, _, bi)) => d2 < bd || (d2 == bd && id < bi),
                    };
                    if better {
                        best = Some((d2, q, id));
                    }
                }
            } else {
                let (l, r) = (node.start, node.right);
                let dl = self.nodes[l].bounds.distance_squared(p);
                let dr = self.nodes[r].bounds.distance_squared(p);
                // visit the nearer child first
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    ids: &mut [usize],
    offset: usize,
    corners: &[[Vec3; 3]],
    centroids: &[Vec3],
) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &i in ids.iter() {
        for c in &corners[i] {
            bounds.grow(c);
        }
        cbounds.grow(&centroids[i]);
    }
    let index = nodes.len();
    nodes.push(Node {
        bounds,
        start: offset,
        count: ids.len(),
        right: 0,
    });
    if ids.len() <= LEAF_SIZE {
        return index;
    }
    let extent = cbounds.max - cbounds.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    ids.sort_by(|&a, &b| {
        centroids[a][axis]
            .total_cmp(&centroids[b][axis])
            .then(a.cmp(&b))
    });
    let mid = ids.len() / 2;
    let (left_ids, right_ids) = ids.split_at_mut(mid);
    let left = build_node(nodes, left_ids, offset, corners, centroids);
    let right = build_node(nodes, right_ids, offset + mid, corners, centroids);
    let mut merged = nodes[left].bounds;
    merged.merge(&nodes[right].bounds);
    nodes[index] = Node {
        bounds: merged,
        start: left,
        count: 0,
        right,
    };
    index
}

/// Möller–Trumbore. Returns `(t, min barycentric)` or `None` when the ray is
/// parallel to the triangle plane or misses it.
pub(crate) fn intersect(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Option<(f64, f64)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    let scale = e1.norm() * e2.norm();
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - tri[0];
    let u = tvec.dot(&pvec) * inv_det;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    let w = 1.0 - u - v;
    Some((t, u.min(v).min(w)))
}

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision
/// Detection, 5.1.5).
pub(crate) fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_closest(p: &Vec3, tris: &[[Vec3; 3]]) -> f64 {
        tris.iter()
            .map(|t| (closest_point_on_triangle(p, &t[0], &t[1], &t[2]) - p).norm_squared())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        );
        let q = closest_point_on_triangle(&Vec3::new(0.2, 0.2, 1.0), &a, &b, &c);
        assert!((q - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        let q = closest_point_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c);
        assert_eq!(q, a);
        let q = closest_point_on_triangle(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((q - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bvh_matches_linear_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut verts = Vec::new();
        let mut tris = Vec::new();
        for i in 0..200u32 {
            for _ in 0..3 {
                verts.push(Vec3::new(rng.gen(), rng.gen(), rng.gen()));
            }
            tris.push([3 * i, 3 * i + 1, 3 * i + 2]);
        }
        let bvh = Bvh::build(&verts, &tris);
        let corners: Vec<[Vec3; 3]> = tris
            .iter()
            .map(|t| [verts[t[0] as usize], verts[t[1] as usize], verts[t[2] as usize]])
            .collect();
        for _ in 0..200 {
            let p = Vec3::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
            let (d2, _, _) = bvh.closest_point(&p).unwrap();
            assert_eq!(d2, brute_closest(&p, &corners));

            let dir = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
            let mut via_bvh = Vec::new();
            bvh.for_each_ray_hit(&p, &dir, |h| via_bvh.push(h.triangle));
            via_bvh.sort_unstable();
            let linear: Vec<usize> = corners
                .iter()
                .enumerate()
                .filter_map(|(i, t)| intersect(&p, &dir, t).filter(|h| h.0 > 0.0).map(|_| i))
                .collect();
            assert_eq!(via_bvh, linear);
        }
    }
}
