//! Contact-map refinement from multi-view part proposals, fingertip
//! pseudo-pose inverse kinematics, and grasp reward and evaluation metrics.
//!
//! The pipeline runs in stages:
//!
//! 1. [`ingest`] loads per-view part proposals and masks, clips masks to the
//!    rendered object silhouette, and calibrates per-view confidences.
//! 2. [`sgcr`] accumulates cross-view support, normalizes, lifts the maps
//!    into a scored point cloud, and keeps points that form a locally convex
//!    pair with a high-confidence seed.
//! 3. [`handkin`] partitions the contact map among fingers and solves a
//!    damped least-squares IK problem for a pseudo hand pose.
//! 4. [`reward`] and [`metrics`] score simulator episode logs against the
//!    contact map and pseudo pose.

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b, tol): (f64, f64, f64) = ($a, $b, $tol);
        assert!((a - b).abs() <= tol, "{} vs {} (tol {})", a, b, tol);
    }};
}

pub mod cli;
pub mod error;
pub mod geometry;
pub mod handkin;
pub mod ingest;
pub mod metrics;
pub mod reward;
pub mod sgcr;

pub use error::{Error, Result};
