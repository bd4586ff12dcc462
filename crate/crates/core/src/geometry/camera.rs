//! Pinhole cameras, depth maps, and the back-/re-projection used for
//! cross-view checks.
//!
//! Conventions: the pose maps world to camera (`x_cam = R x_world + t`), the
//! camera looks down +Z, image origin is the top-left corner with +u right
//! and +v down. Integer pixel `(col, row)` covers `[col, col+1) x [row, row+1)`
//! and is sampled at its center `(col + 0.5, row + 0.5)`.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Pixel = Vector2<f64>;

/// Value returned by [`depth_consistency`] when the destination view has no
/// usable depth for the reprojected point.
pub const DEPTH_MISS: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    /// Square image with the principal point at the image center and the
    /// given horizontal field of view (radians).
    pub fn from_fov(width: usize, height: usize, fov_x: f64) -> Result<Self> {
        let fx = width as f64 / (2.0 * (fov_x / 2.0).tan());
        Self::new(fx, fx, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::InvalidCamera(format!(
                "focal lengths must be positive (fx = {}, fy = {})",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidCamera("image must be at least 1x1".into()));
        }
        let in_range = |c: f64, n: usize| c.is_finite() && (0.0..=n as f64).contains(&c);
        if !in_range(self.cx, self.width) || !in_range(self.cy, self.height) {
            return Err(Error::InvalidCamera(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn contains(&self, pixel: &Pixel) -> bool {
        pixel.x >= 0.0
            && pixel.y >= 0.0
            && pixel.x < self.width as f64
            && pixel.y < self.height as f64
    }

    fn check_bounds(&self, pixel: &Pixel) -> Result<()> {
        if self.contains(pixel) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                u: pixel.x,
                v: pixel.y,
                width: self.width,
                height: self.height,
            })
        }
    }
}

/// Rigid world-to-camera transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl CameraPose {
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let pose = Self {
            rotation,
            translation,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let gram = self.rotation.transpose() * self.rotation - Matrix3::identity();
        if gram.amax() > 1e-9 {
            return Err(Error::InvalidCamera(format!(
                "rotation is not orthonormal (max deviation {:e})",
                gram.amax()
            )));
        }
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCamera(format!(
                "rotation determinant is {det}, expected +1"
            )));
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidCamera("translation is not finite".into()));
        }
        Ok(())
    }

    /// Camera placed at `eye` looking at `target`; `up` picks the roll so
    /// that image rows run against it.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> Result<Self> {
        let forward = target - eye;
        if forward.norm() < 1e-12 {
            return Err(Error::InvalidCamera("eye coincides with target".into()));
        }
        let z = forward.normalize();
        let x = z.cross(&up);
        if x.norm() < 1e-12 {
            return Err(Error::InvalidCamera("up vector is parallel to view direction".into()));
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let rotation = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let translation = -(rotation * eye);
        Self::new(rotation, translation)
    }

    pub fn to_camera(&self, world: &Vec3) -> Vec3 {
        self.rotation * world + self.translation
    }

    pub fn to_world(&self, cam: &Vec3) -> Vec3 {
        self.rotation.transpose() * (cam - self.translation)
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub intrinsics: CameraIntrinsics,
    pub pose: CameraPose,
}

impl Camera {
    pub fn new(intrinsics: CameraIntrinsics, pose: CameraPose) -> Result<Self> {
        intrinsics.validate()?;
        pose.validate()?;
        Ok(Self { intrinsics, pose })
    }

    pub fn width(&self) -> usize {
        self.intrinsics.width
    }

    pub fn height(&self) -> usize {
        self.intrinsics.height
    }

    /// World-space ray through `pixel`: origin, unit direction, and the
    /// camera-frame depth gained per unit of ray length.
    pub fn ray(&self, pixel: &Pixel) -> (Vec3, Vec3, f64) {
        let k = &self.intrinsics;
        let cam_dir = Vec3::new((pixel.x - k.cx) / k.fx, (pixel.y - k.cy) / k.fy, 1.0);
        let norm = cam_dir.norm();
        let dir = self.pose.rotation.transpose() * (cam_dir / norm);
        (self.pose.center(), dir, 1.0 / norm)
    }
}

/// Per-pixel depth in meters, row-major. Background pixels are stored as
/// NaN and surface as `None` through the accessors.
#[derive(Debug, Clone)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DepthMap {
    /// Builds a map, normalizing every non-finite or non-positive value to
    /// "no hit".
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Shape(format!(
                "depth buffer has {} values for a {width}x{height} image",
                values.len()
            )));
        }
        let values = values
            .into_iter()
            .map(|d| if d.is_finite() && d > 0.0 { d } else { f64::NAN })
            .collect();
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![f64::NAN; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        if col >= self.width || row >= self.height {
            return None;
        }
        let d = self.values[row * self.width + col];
        (!d.is_nan()).then_some(d)
    }

    pub(crate) fn set(&mut self, col: usize, row: usize, depth: Option<f64>) {
        self.values[row * self.width + col] = match depth {
            Some(d) if d.is_finite() && d > 0.0 => d,
            _ => f64::NAN,
        };
    }

    pub fn is_valid(&self, col: usize, row: usize) -> bool {
        self.get(col, row).is_some()
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|d| !d.is_nan()).count()
    }

    /// Raw buffer; NaN marks background.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Depth at a continuous pixel position. Bilinear between the four
    /// surrounding pixel centers when all of them are valid, otherwise the
    /// containing pixel's own value.
    pub fn sample(&self, pixel: &Pixel) -> Option<f64> {
        let (col, row) = pixel_index(pixel, self.width, self.height)?;
        let nearest = self.get(col, row)?;
        let x = pixel.x - 0.5;
        let y = pixel.y - 0.5;
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        if !(1e-9..=1.0 - 1e-9).contains(&fx) && !(1e-9..=1.0 - 1e-9).contains(&fy) {
            return Some(nearest);
        }
        if x0 < 0.0 || y0 < 0.0 {
            return Some(nearest);
        }
        let (c0, r0) = (x0 as usize, y0 as usize);
        let corners = (
            self.get(c0, r0),
            self.get(c0 + 1, r0),
            self.get(c0, r0 + 1),
            self.get(c0 + 1, r0 + 1),
        );
        match corners {
            (Some(a), Some(b), Some(c), Some(d)) => {
                let top = a * (1.0 - fx) + b * fx;
                let bottom = c * (1.0 - fx) + d * fx;
                Some(top * (1.0 - fy) + bottom * fy)
            }
            _ => Some(nearest),
        }
    }
}

// Bitwise so that two background pixels compare equal.
impl PartialEq for DepthMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Integer pixel containing a continuous position, if inside the image.
pub fn pixel_index(pixel: &Pixel, width: usize, height: usize) -> Option<(usize, usize)> {
    if !(pixel.x >= 0.0 && pixel.y >= 0.0) {
        return None;
    }
    let (col, row) = (pixel.x.floor() as usize, pixel.y.floor() as usize);
    (col < width && row < height).then_some((col, row))
}

pub fn pixel_center(col: usize, row: usize) -> Pixel {
    Pixel::new(col as f64 + 0.5, row as f64 + 0.5)
}

/// One of the fixed viewpoints: camera plus its rendered depth.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraView {
    pub view_id: usize,
    pub camera: Camera,
    pub depth: Option<DepthMap>,
}

impl CameraView {
    pub fn new(view_id: usize, camera: Camera, depth: Option<DepthMap>) -> Result<Self> {
        if let Some(d) = &depth {
            if d.width() != camera.width() || d.height() != camera.height() {
                return Err(Error::Shape(format!(
                    "view {view_id}: depth map is {}x{} but camera is {}x{}",
                    d.width(),
                    d.height(),
                    camera.width(),
                    camera.height()
                )));
            }
        }
        Ok(Self {
            view_id,
            camera,
            depth,
        })
    }

    pub fn depth(&self) -> Result<&DepthMap> {
        self.depth.as_ref().ok_or(Error::MissingDepth(self.view_id))
    }
}

/// Lifts `pixel` at camera-frame depth `depth` to a world point.
pub fn back_project(camera: &Camera, pixel: &Pixel, depth: f64) -> Result<Vec3> {
    if !(depth.is_finite() && depth > 0.0) {
        return Err(Error::InvalidDepth(depth));
    }
    camera.intrinsics.check_bounds(pixel)?;
    let k = &camera.intrinsics;
    let cam = Vec3::new(
        (pixel.x - k.cx) / k.fx * depth,
        (pixel.y - k.cy) / k.fy * depth,
        depth,
    );
    Ok(camera.pose.to_world(&cam))
}

/// Projects a world point; returns the continuous pixel and camera-frame depth.
/// The pixel may fall outside the image.
pub fn reproject(point: &Vec3, camera: &Camera) -> Result<(Pixel, f64)> {
    let cam = camera.pose.to_camera(point);
    if !(cam.z > 0.0) {
        return Err(Error::BehindCamera(cam.z));
    }
    let k = &camera.intrinsics;
    let pixel = Pixel::new(k.fx * cam.x / cam.z + k.cx, k.fy * cam.y / cam.z + k.cy);
    Ok((pixel, cam.z))
}

/// Outcome of transferring one source pixel into a destination view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    /// Integer destination pixel, when the projection lands inside the image.
    pub dst_pixel: Option<(usize, usize)>,
    /// `|D_dst - z|`, or [`DEPTH_MISS`].
    pub delta: f64,
}

/// Back-projects `pixel` from `src` using its own depth and compares the
/// reprojected depth in `dst` against `dst`'s depth map.
pub fn transfer_pixel(pixel: &Pixel, src: &CameraView, dst: &CameraView) -> Result<Transfer> {
    let src_depth = src.depth()?;
    src.camera.intrinsics.check_bounds(pixel)?;
    let (col, row) = pixel_index(pixel, src_depth.width(), src_depth.height()).ok_or(
        Error::OutOfBounds {
            u: pixel.x,
            v: pixel.y,
            width: src_depth.width(),
            height: src_depth.height(),
        },
    )?;
    let d = src_depth.get(col, row).ok_or(Error::InvalidDepth(f64::NAN))?;
    let dst_depth = dst.depth()?;
    if std::ptr::eq(src, dst) || (src.view_id == dst.view_id && src.camera == dst.camera) {
        return Ok(Transfer {
            dst_pixel: Some((col, row)),
            delta: 0.0,
        });
    }
    let world = back_project(&src.camera, pixel, d)?;
    let miss = Transfer {
        dst_pixel: None,
        delta: DEPTH_MISS,
    };
    let Ok((dst_px, z)) = reproject(&world, &dst.camera) else {
        return Ok(miss);
    };
    let Some(index) = pixel_index(&dst_px, dst_depth.width(), dst_depth.height()) else {
        return Ok(miss);
    };
    let delta = match dst_depth.sample(&dst_px) {
        Some(actual) => (actual - z).abs(),
        None => DEPTH_MISS,
    };
    Ok(Transfer {
        dst_pixel: Some(index),
        delta,
    })
}

/// Absolute discrepancy between the depth `dst` observes at the reprojection
/// of `pixel` and the reprojected depth itself. Returns [`DEPTH_MISS`] when
/// `dst` has no valid depth there.
pub fn depth_consistency(pixel: &Pixel, src: &CameraView, dst: &CameraView) -> Result<f64> {
    Ok(transfer_pixel(pixel, src, dst)?.delta)
}
