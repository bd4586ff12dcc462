use rayon::prelude::*;

use super::camera::{pixel_center, Camera, DepthMap};
use super::mesh::TriangleMesh;

/// Ray-casts one depth sample per pixel center: camera-frame depth of the
/// nearest triangle hit, or no-hit. Bit-identical for identical inputs.
pub fn render_depth(mesh: &TriangleMesh, camera: &Camera) -> DepthMap {
    let (width, height) = (camera.width(), camera.height());
    let mut depth = DepthMap::empty(width, height);
    if mesh.is_empty() {
        return depth;
    }
    let bvh = mesh.bvh();
    let rows: Vec<Vec<Option<f64>>> = (0..height)
        .into_par_iter()
        .map(|row| {
            (0..width)
                .map(|col| {
                    let (origin, dir, z_per_t) = camera.ray(&pixel_center(col, row));
                    bvh.nearest_hit(&origin, &dir).map(|hit| hit.t * z_per_t)
                })
                .collect()
        })
        .collect();
    for (row, values) in rows.into_iter().enumerate() {
        for (col, d) in values.into_iter().enumerate() {
            depth.set(col, row, d);
        }
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::camera::{CameraIntrinsics, CameraPose, Vec3};
    use crate::geometry::shapes;

    fn front_camera(res: usize, distance: f64) -> Camera {
        Camera::new(
            CameraIntrinsics::from_fov(res, res, 40f64.to_radians()).unwrap(),
            CameraPose::look_at(
                Vec3::new(0.0, -distance, 0.0),
                Vec3::zeros(),
                Vec3::new(0.0, 0.0, 1.0),
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn empty_mesh_renders_background() {
        let d = render_depth(&TriangleMesh::empty(), &front_camera(16, 1.0));
        assert_eq!(d.valid_count(), 0);
    }

    #[test]
    fn render_is_deterministic() {
        let mesh = shapes::torus(0.1, 0.03, 32, 16);
        let cam = front_camera(48, 0.5);
        assert_eq!(render_depth(&mesh, &cam), render_depth(&mesh, &cam));
    }
}
