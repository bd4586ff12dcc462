use nalgebra::{DMatrix, DVector, Rotation3, Unit};
use serde::{Deserialize, Serialize};

use super::chain::KinematicChain;
use super::fk::{check_dims, fingertip_jacobian, forward_kinematics, wrap_rotation_vector, HandConfiguration};
use super::partition::{sorted_centroid, FingerRegionAssignment};
use crate::error::{Error, Result};
use crate::geometry::{TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// Nearest region point recomputed before every update.
    #[default]
    Reselect,
    /// Nearest region point chosen once at the initial pose.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkParams {
    pub iterations: usize,
    /// Damping λ_dls.
    pub lambda_dls: f64,
    /// Step size η.
    pub eta: f64,
    pub targets: TargetMode,
    /// Hold the wrist at its initial pose and move only the joints.
    pub lock_wrist: bool,
}

impl Default for IkParams {
    fn default() -> Self {
        Self {
            iterations: 12,
            lambda_dls: 0.05,
            eta: 1.0,
            targets: TargetMode::Reselect,
            lock_wrist: false,
        }
    }
}

impl IkParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("IK needs at least one iteration".into()));
        }
        if !(self.lambda_dls.is_finite() && self.lambda_dls > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "IK damping must be positive, got {}",
                self.lambda_dls
            )));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "IK step must be positive, got {}",
                self.eta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IkResult {
    pub pose: HandConfiguration,
    /// Objective before the first update and after each one.
    pub trace: Vec<f64>,
    /// Target point of each finger at the final pose.
    pub targets: Vec<Vec3>,
}

/// Componentwise clamp of θ to the joint limits.
pub fn clamp_joints(chain: &KinematicChain, theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .zip(chain.limits())
        .map(|(q, [lo, hi])| q.clamp(lo, hi))
        .collect()
}

fn check_assignment(chain: &KinematicChain, assignment: &FingerRegionAssignment) -> Result<()> {
    if assignment.regions.len() != chain.finger_count() {
        return Err(Error::Assignment(format!(
            "{} regions for {} fingers",
            assignment.regions.len(),
            chain.finger_count()
        )));
    }
    if let Some(f) = assignment.regions.iter().position(|r| r.is_empty()) {
        return Err(Error::Assignment(format!(
            "finger {:?} has an empty target region",
            chain.fingertips[f].finger
        )));
    }
    Ok(())
}

/// Nearest region point for each tip; ties go to the earlier point.
pub fn nearest_targets(tips: &[Vec3], assignment: &FingerRegionAssignment) -> Vec<Vec3> {
    tips.iter()
        .zip(&assignment.regions)
        .map(|(tip, region)| {
            let mut best = region[0];
            let mut best_d = (tip - best).norm_squared();
            for y in &region[1..] {
                let d = (tip - y).norm_squared();
                if d < best_d {
                    best = *y;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn residual_sum(tips: &[Vec3], targets: &[Vec3]) -> f64 {
    tips.iter().zip(targets).map(|(a, b)| (a - b).norm_squared()).sum()
}

/// `Σ_f min_{y ∈ R_f} ‖ξ_f(h) − y‖²`.
pub fn ik_objective(
    chain: &KinematicChain,
    h: &HandConfiguration,
    assignment: &FingerRegionAssignment,
) -> Result<f64> {
    check_assignment(chain, assignment)?;
    let tips = forward_kinematics(chain, h)?;
    Ok(residual_sum(&tips, &nearest_targets(&tips, assignment)))
}

/// Damped least-squares updates `Δh = −Jᵀ(JJᵀ + λ²I)⁻¹e`, `h ← h + ηΔh`.
/// Joints are clamped to their limits (including at `h0`) and the wrist
/// rotation vector is kept within angle π. With [`TargetMode::Fixed`] the
/// trace measures distance to the fixed targets; otherwise it is
/// [`ik_objective`].
pub fn solve_ik(
    chain: &KinematicChain,
    h0: &HandConfiguration,
    assignment: &FingerRegionAssignment,
    params: &IkParams,
) -> Result<IkResult> {
    params.validate()?;
    check_dims(chain, h0)?;
    check_assignment(chain, assignment)?;
    let mut h = HandConfiguration {
        theta: clamp_joints(chain, &h0.theta),
        ..h0.clone()
    };
    let mut tips = forward_kinematics(chain, &h)?;
    let fixed = nearest_targets(&tips, assignment);
    let targets_at = |tips: &[Vec3]| match params.targets {
        TargetMode::Reselect => nearest_targets(tips, assignment),
        TargetMode::Fixed => fixed.clone(),
    };
    let mut targets = targets_at(&tips);
    let mut trace = Vec::with_capacity(params.iterations + 1);
    trace.push(residual_sum(&tips, &targets));
    let lambda2 = params.lambda_dls * params.lambda_dls;
    let n = 3 * chain.finger_count();
    for _ in 0..params.iterations {
        let mut e = DVector::zeros(n);
        for (f, (tip, y)) in tips.iter().zip(&targets).enumerate() {
            e.fixed_rows_mut::<3>(3 * f).copy_from(&(tip - y));
        }
        let mut jac = fingertip_jacobian(chain, &h)?;
        if params.lock_wrist {
            jac.columns_mut(0, 6).fill(0.0);
        }
        let a: DMatrix<f64> = &jac * jac.transpose() + DMatrix::identity(n, n) * lambda2;
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::Numeric("damped normal matrix is not positive definite".into()))?;
        let dh = -(jac.transpose() * chol.solve(&e));
        if dh.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("IK update is not finite".into()));
        }
        let mut v = h.to_vector();
        for (x, d) in v.iter_mut().zip(dh.iter()) {
            *x += params.eta * d;
        }
        let next = HandConfiguration::from_vector(&v);
        h = HandConfiguration {
            w: next.w,
            phi: wrap_rotation_vector(&next.phi),
            theta: clamp_joints(chain, &next.theta),
        };
        tips = forward_kinematics(chain, &h)?;
        targets = targets_at(&tips);
        trace.push(residual_sum(&tips, &targets));
    }
    Ok(IkResult {
        pose: h,
        trace,
        targets,
    })
}

/// Default standoff between the contact centroid and the wrist, meters.
pub const DEFAULT_STANDOFF: f64 = 0.12;

/// Mean outward unit normal of the mesh at the points' nearest triangles,
/// or `None` when it cancels out.
pub fn mean_outward_normal(points: &[Vec3], mesh: &TriangleMesh) -> Result<Option<Vec3>> {
    let flip = if crate::geometry::shapes::signed_volume(mesh) < 0.0 {
        -1.0
    } else {
        1.0
    };
    let mut normals = Vec::with_capacity(points.len());
    for p in points {
        let (_, tri) = mesh.closest_point(p)?;
        normals.push(mesh.triangle_normal(tri) * flip);
    }
    let mean = sorted_centroid(&normals);
    Ok((mean.norm() > 1e-9).then(|| mean.normalize()))
}

/// Wrist at the contact centroid pushed out along the mean outward normal by
/// `standoff`, palm turned toward the centroid, joints at mid-range. Without
/// a mesh, or when the normals cancel, world +Z is used as the normal.
pub fn default_initial_pose(
    chain: &KinematicChain,
    points: &[Vec3],
    mesh: Option<&TriangleMesh>,
    standoff: f64,
) -> Result<HandConfiguration> {
    if points.is_empty() {
        return Err(Error::EmptyInput("contact map has no points"));
    }
    let centroid = sorted_centroid(points);
    let normal = match mesh {
        Some(m) => mean_outward_normal(points, m)?,
        None => None,
    }
    .unwrap_or_else(Vec3::z);
    let rotation = rotation_between_safe(&chain.palm_normal, &(-normal));
    Ok(HandConfiguration {
        w: centroid + normal * standoff,
        phi: rotation.scaled_axis(),
        theta: chain.mid_range(),
    })
}

fn rotation_between_safe(from: &Vec3, to: &Vec3) -> Rotation3<f64> {
    if let Some(r) = Rotation3::rotation_between(from, to) {
        return r;
    }
    if from.dot(to) > 0.0 {
        return Rotation3::identity();
    }
    // antiparallel: half turn about any perpendicular axis
    let helper = if from.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let axis = Unit::new_normalize(from.cross(&helper));
    Rotation3::from_axis_angle(&axis, std::f64::consts::PI)
}
