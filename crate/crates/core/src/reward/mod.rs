//! Pose-tracking, pose-guidance, contact, and task rewards evaluated on
//! logged simulator snapshots.

pub mod log;

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::handkin::HandConfiguration;
pub use log::{format_log, parse_log, read_log, EpisodeLog, SimStateSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaShape {
    /// Straight line from 1 at t = 0 to the floor at the horizon.
    #[default]
    Linear,
    /// `max(floor, floor^(t/horizon))`: same endpoints, front-loaded decay.
    Exponential,
}

/// Which parts of the reference state the tracking score compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Wrist position, wrist orientation, and joints.
    #[default]
    Full,
    /// Joints only; wrist errors count as zero.
    JointOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskWeights {
    pub approach: f64,
    pub lift: f64,
    pub goal: f64,
    pub bonus: f64,
}

impl Default for TaskWeights {
    fn default() -> Self {
        Self {
            approach: 1.0,
            lift: 1.0,
            goal: 1.0,
            bonus: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub lambda_w: f64,
    pub lambda_phi: f64,
    pub lambda_theta: f64,
    pub beta: f64,
    pub beta_c: f64,
    pub kappa_horizon: f64,
    pub kappa_floor: f64,
    pub kappa_shape: KappaShape,
    /// Fingertip-to-map distance counted as contact, meters (inclusive).
    pub contact_threshold: f64,
    pub task_weights: TaskWeights,
    /// World height of the table surface, meters.
    pub table_height: f64,
    /// Object-to-goal distance that earns the bonus, meters (exclusive).
    pub bonus_radius: f64,
    pub reference_mode: ReferenceMode,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            lambda_w: 7.0,
            lambda_phi: 2.0,
            lambda_theta: 0.12,
            beta: 0.55,
            beta_c: 0.25,
            kappa_horizon: 80.0,
            kappa_floor: 0.15,
            kappa_shape: KappaShape::Linear,
            contact_threshold: 0.01,
            task_weights: TaskWeights::default(),
            table_height: 0.0,
            bonus_radius: 0.05,
            reference_mode: ReferenceMode::Full,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let w = &self.task_weights;
        let weights = [
            self.lambda_w,
            self.lambda_phi,
            self.lambda_theta,
            self.beta,
            self.beta_c,
            self.contact_threshold,
            self.bonus_radius,
            w.approach,
            w.lift,
            w.goal,
            w.bonus,
        ];
        if weights.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidConfig("reward weights must be finite and non-negative".into()));
        }
        if !(self.kappa_floor > 0.0 && self.kappa_floor <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "kappa_floor must lie in (0, 1], got {}",
                self.kappa_floor
            )));
        }
        if !(self.kappa_horizon.is_finite() && self.kappa_horizon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "kappa_horizon must be positive, got {}",
                self.kappa_horizon
            )));
        }
        if !self.table_height.is_finite() {
            return Err(Error::InvalidConfig("table_height must be finite".into()));
        }
        Ok(())
    }
}

/// `exp(−λ_w‖Δw‖₂ − λ_φ‖Δφ‖₂ − λ_θ‖Δθ‖₁)`.
pub fn track_score(dw: &Vec3, dphi: &Vec3, dtheta: &[f64], cfg: &RewardConfig) -> f64 {
    let l1: f64 = dtheta.iter().map(|d| d.abs()).sum();
    (-cfg.lambda_w * dw.norm() - cfg.lambda_phi * dphi.norm() - cfg.lambda_theta * l1).exp()
}

/// Errors of `current` relative to `reference`: wrist offset, relative
/// rotation vector `log(R_ref⁻¹·R)`, and joint differences.
pub fn hand_errors(
    current: &HandConfiguration,
    reference: &HandConfiguration,
    mode: ReferenceMode,
) -> Result<(Vec3, Vec3, Vec<f64>)> {
    if current.theta.len() != reference.theta.len() {
        return Err(Error::Dimension {
            expected: reference.theta.len(),
            actual: current.theta.len(),
        });
    }
    let dtheta = current
        .theta
        .iter()
        .zip(&reference.theta)
        .map(|(a, b)| a - b)
        .collect();
    Ok(match mode {
        ReferenceMode::Full => {
            let rel = Rotation3::new(reference.phi).inverse() * Rotation3::new(current.phi);
            (current.w - reference.w, rel.scaled_axis(), dtheta)
        }
        ReferenceMode::JointOnly => (Vec3::zeros(), Vec3::zeros(), dtheta),
    })
}

pub fn track_score_between(
    current: &HandConfiguration,
    reference: &HandConfiguration,
    cfg: &RewardConfig,
) -> Result<f64> {
    let (dw, dphi, dtheta) = hand_errors(current, reference, cfg.reference_mode)?;
    Ok(track_score(&dw, &dphi, &dtheta, cfg))
}

/// Pose-guidance weight: 1 at t = 0, reaching the floor at the horizon and
/// staying there.
pub fn kappa(t: f64, cfg: &RewardConfig) -> f64 {
    let (h, floor) = (cfg.kappa_horizon, cfg.kappa_floor);
    let t = t.max(0.0);
    if t >= h {
        return floor;
    }
    match cfg.kappa_shape {
        KappaShape::Linear => (1.0 - (1.0 - floor) * t / h).max(floor),
        KappaShape::Exponential => floor.powf(t / h).max(floor),
    }
}

/// `β·κ_t·r_track`.
pub fn pose_reward(t: f64, r_track: f64, cfg: &RewardConfig) -> f64 {
    cfg.beta * kappa(t, cfg) * r_track
}

/// Whether any fingertip lies within `threshold` (inclusive) of any map point.
pub fn contact_indicator(fingertips: &[Vec3], map_points: &[Vec3], threshold: f64) -> Result<bool> {
    if map_points.is_empty() {
        return Err(Error::Assignment("contact map is empty".into()));
    }
    Ok(fingertips
        .iter()
        .any(|tip| map_points.iter().any(|q| (tip - q).norm() <= threshold)))
}

/// `β_c·b·r_track`.
pub fn contact_reward(b: bool, r_track: f64, cfg: &RewardConfig) -> f64 {
    if b {
        cfg.beta_c * r_track
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskTerms {
    pub approach: f64,
    pub lift: f64,
    pub goal: f64,
    pub bonus: f64,
}

impl TaskTerms {
    pub fn sum(&self) -> f64 {
        self.approach + self.lift + self.goal + self.bonus
    }
}

/// Approach: minus the mean fingertip-object distance. Lift: object height
/// above the table. Goal: minus the object-goal distance. Bonus: paid when
/// the object is within the bonus radius of the goal. Each is scaled by its
/// weight.
pub fn task_reward(snapshot: &SimStateSnapshot, cfg: &RewardConfig) -> TaskTerms {
    let w = &cfg.task_weights;
    let mean_tip = if snapshot.fingertips.is_empty() {
        0.0
    } else {
        snapshot
            .fingertips
            .iter()
            .map(|f| (f - snapshot.object).norm())
            .sum::<f64>()
            / snapshot.fingertips.len() as f64
    };
    let goal_dist = (snapshot.object - snapshot.goal).norm();
    TaskTerms {
        approach: -w.approach * mean_tip,
        lift: w.lift * (snapshot.object.z - cfg.table_height).max(0.0),
        goal: -w.goal * goal_dist,
        bonus: if goal_dist < cfg.bonus_radius { w.bonus } else { 0.0 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub t: u64,
    pub r_track: f64,
    pub contact: bool,
    pub r_pose: f64,
    pub r_contact: f64,
    pub r_approach: f64,
    pub r_lift: f64,
    pub r_goal: f64,
    pub r_bonus: f64,
    pub total: f64,
}

/// `r_pose + r_contact + r_task` for one snapshot.
pub fn total_reward(
    snapshot: &SimStateSnapshot,
    map_points: &[Vec3],
    cfg: &RewardConfig,
) -> Result<RewardBreakdown> {
    let r_track = track_score_between(&snapshot.hand, &snapshot.reference, cfg)?;
    let b = contact_indicator(&snapshot.fingertips, map_points, cfg.contact_threshold)?;
    let r_pose = pose_reward(snapshot.t as f64, r_track, cfg);
    let r_contact = contact_reward(b, r_track, cfg);
    let task = task_reward(snapshot, cfg);
    Ok(RewardBreakdown {
        t: snapshot.t,
        r_track,
        contact: b,
        r_pose,
        r_contact,
        r_approach: task.approach,
        r_lift: task.lift,
        r_goal: task.goal,
        r_bonus: task.bonus,
        total: r_pose + r_contact + task.sum(),
    })
}

pub fn episode_rewards(log: &EpisodeLog, map_points: &[Vec3], cfg: &RewardConfig) -> Result<Vec<RewardBreakdown>> {
    log.snapshots
        .iter()
        .map(|s| total_reward(s, map_points, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_constants() {
        let cfg = RewardConfig::default();
        assert_eq!(track_score(&Vec3::zeros(), &Vec3::zeros(), &[0.0; 4], &cfg), 1.0);
        assert_eq!(kappa(0.0, &cfg), 1.0);
        assert_eq!(kappa(80.0, &cfg), 0.15);
        assert_eq!(kappa(500.0, &cfg), 0.15);
        assert_close!(kappa(40.0, &cfg), 0.575, 1e-15);
        assert_eq!(pose_reward(0.0, 1.0, &cfg), 0.55);
        assert_eq!(contact_reward(true, 1.0, &cfg), 0.25);
        assert_eq!(contact_reward(false, 1.0, &cfg), 0.0);
    }

    #[test]
    fn exponential_schedule_keeps_endpoints() {
        let cfg = RewardConfig {
            kappa_shape: KappaShape::Exponential,
            ..RewardConfig::default()
        };
        assert_eq!(kappa(0.0, &cfg), 1.0);
        assert_eq!(kappa(80.0, &cfg), 0.15);
        assert!(kappa(40.0, &cfg) < 0.575);
    }

    #[test]
    fn orientation_error_is_relative_rotation() {
        let a = HandConfiguration::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 0.3), vec![]);
        let b = HandConfiguration::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 0.5), vec![]);
        let (_, dphi, _) = hand_errors(&b, &a, ReferenceMode::Full).unwrap();
        assert_close!(dphi.z, 0.2, 1e-12);
        assert!(hand_errors(&HandConfiguration::zero(2), &a, ReferenceMode::Full).is_err());
    }
}
