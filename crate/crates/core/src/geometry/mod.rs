//! Cameras, depth maps, projection, triangle-mesh volume queries, and the
//! software depth renderer used to build synthetic scenes.

mod bvh;
pub mod camera;
pub mod io;
pub mod mesh;
pub mod render;
pub mod shapes;

pub use camera::{
    back_project, depth_consistency, pixel_center, pixel_index, reproject, transfer_pixel, Camera,
    CameraIntrinsics, CameraPose, CameraView, DepthMap, Pixel, Transfer, Vec3, DEPTH_MISS,
};
pub use mesh::{InsideTest, TriangleMesh};
pub use render::render_depth;
