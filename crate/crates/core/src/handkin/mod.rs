//! Hand chains, forward kinematics, fingertip Jacobians, contact-region
//! partitioning, and the damped least-squares pseudo-pose solver.

pub mod chain;
pub mod fk;
pub mod ik;
pub mod partition;

pub use chain::{builtin_chain, load_chain, parse_chain, read_chain, ChainDocument, KinematicChain};
pub use fk::{fingertip_jacobian, forward_kinematics, so3_left_jacobian, wrap_rotation_vector, HandConfiguration};
pub use ik::{
    clamp_joints, default_initial_pose, ik_objective, mean_outward_normal, nearest_targets, solve_ik,
    IkParams, IkResult, TargetMode, DEFAULT_STANDOFF,
};
pub use partition::{partition_regions, principal_axis, sorted_centroid, FingerRegionAssignment, ThumbSide};
