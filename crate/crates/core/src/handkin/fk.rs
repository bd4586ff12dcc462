use nalgebra::{DMatrix, Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::chain::{JointKind, KinematicChain};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Hand state `h = (w, φ, θ)`: wrist position, wrist orientation as a
/// rotation vector, and joint angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandConfiguration {
    pub w: Vec3,
    pub phi: Vec3,
    pub theta: Vec<f64>,
}

impl HandConfiguration {
    pub fn new(w: Vec3, phi: Vec3, theta: Vec<f64>) -> Self {
        Self { w, phi, theta }
    }

    /// Wrist at the origin, identity orientation, all joints zero.
    pub fn zero(dof: usize) -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros(), vec![0.0; dof])
    }

    pub fn wrist_rotation(&self) -> Rotation3<f64> {
        Rotation3::new(self.phi)
    }

    pub fn wrist_pose(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::from(self.w),
            UnitQuaternion::from_scaled_axis(self.phi),
        )
    }

    /// Parameter vector `[w, φ, θ]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(6 + self.theta.len());
        v.extend(self.w.iter());
        v.extend(self.phi.iter());
        v.extend(self.theta.iter());
        v
    }

    pub fn from_vector(v: &[f64]) -> Self {
        Self::new(
            Vec3::new(v[0], v[1], v[2]),
            Vec3::new(v[3], v[4], v[5]),
            v[6..].to_vec(),
        )
    }
}

/// Rewrites a rotation vector so its angle lies in [0, π].
pub fn wrap_rotation_vector(phi: &Vec3) -> Vec3 {
    let angle = phi.norm();
    if angle <= std::f64::consts::PI {
        return *phi;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = angle.rem_euclid(two_pi);
    if t > std::f64::consts::PI {
        t -= two_pi;
    }
    phi * (t / angle)
}

fn skew(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Left Jacobian of SO(3): `R(φ + δ) ≈ exp(J_l(φ)·δ)·R(φ)`.
pub fn so3_left_jacobian(phi: &Vec3) -> Matrix3<f64> {
    let t = phi.norm();
    let k = skew(phi);
    let k2 = k * k;
    let (a, b) = if t < 1e-5 {
        (0.5 - t * t / 24.0, 1.0 / 6.0 - t * t / 120.0)
    } else {
        ((1.0 - t.cos()) / (t * t), (t - t.sin()) / (t * t * t))
    };
    Matrix3::identity() + k * a + k2 * b
}

pub(crate) fn check_dims(chain: &KinematicChain, h: &HandConfiguration) -> Result<()> {
    if h.theta.len() != chain.dof() {
        return Err(Error::Dimension {
            expected: chain.dof(),
            actual: h.theta.len(),
        });
    }
    Ok(())
}

/// Child-link frame of every joint, in the wrist frame, stored order.
fn joint_frames(chain: &KinematicChain, theta: &[f64]) -> Vec<Isometry3<f64>> {
    let mut frames: Vec<Isometry3<f64>> = Vec::with_capacity(chain.joints.len());
    for joint in &chain.joints {
        let parent = joint.parent_joint.map(|p| frames[p]).unwrap_or_else(Isometry3::identity);
        let q = match (joint.kind, joint.dof) {
            (JointKind::Revolute, Some(d)) => theta[d],
            _ => 0.0,
        };
        let motion = Isometry3::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_axis_angle(&joint.axis, q),
        );
        frames.push(parent * joint.origin * motion);
    }
    frames
}

fn tip_in_wrist(chain: &KinematicChain, frames: &[Isometry3<f64>], f: usize) -> Vec3 {
    let tip = &chain.fingertips[f];
    let frame = tip.frame_joint.map(|k| frames[k]).unwrap_or_else(Isometry3::identity);
    frame.transform_point(&tip.offset.into()).coords
}

/// World fingertip positions ξ_f(h), in fingertip declaration order.
pub fn forward_kinematics(chain: &KinematicChain, h: &HandConfiguration) -> Result<Vec<Vec3>> {
    check_dims(chain, h)?;
    let frames = joint_frames(chain, &h.theta);
    let r = h.wrist_rotation();
    Ok((0..chain.finger_count())
        .map(|f| h.w + r * tip_in_wrist(chain, &frames, f))
        .collect())
}

/// `∂ξ/∂h` for the stacked fingertips: `3·|F|` rows, `6 + d_θ` columns in
/// the order `[w, φ, θ]`.
pub fn fingertip_jacobian(chain: &KinematicChain, h: &HandConfiguration) -> Result<DMatrix<f64>> {
    check_dims(chain, h)?;
    let frames = joint_frames(chain, &h.theta);
    let r = h.wrist_rotation();
    let jl = so3_left_jacobian(&h.phi);
    let nf = chain.finger_count();
    let mut jac = DMatrix::zeros(3 * nf, 6 + chain.dof());
    for f in 0..nf {
        let local = tip_in_wrist(chain, &frames, f);
        let rotated = r * local;
        let xi = h.w + rotated;
        let row = 3 * f;
        jac.fixed_view_mut::<3, 3>(row, 0).copy_from(&Matrix3::identity());
        jac.fixed_view_mut::<3, 3>(row, 3).copy_from(&(-skew(&rotated) * jl));
        for &k in &chain.fingertips[f].path {
            let joint = &chain.joints[k];
            let Some(d) = joint.dof else { continue };
            let frame = frames[k];
            let axis = r * (frame.rotation * joint.axis.into_inner());
            let pivot = h.w + r * frame.translation.vector;
            let col = axis.cross(&(xi - pivot));
            jac.fixed_view_mut::<3, 1>(row, 6 + d).copy_from(&col);
        }
    }
    Ok(jac)
}
