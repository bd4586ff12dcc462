use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::InsideTest;
use crate::ingest::Calibration;

/// Which views lend support to a source view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighbors {
    /// Every other view.
    #[default]
    AllOthers,
    /// The previous and next view in `view_id` order, treated as a ring.
    Adjacent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgcrConfig {
    /// Weight of one supporting view.
    pub alpha: f64,
    /// Depth-consistency threshold in meters.
    pub tau: f64,
    pub seed_fraction: f64,
    pub neighbors: Neighbors,
    /// Interior samples per segment in the convex-pair test.
    pub convexity_samples: usize,
    /// Distance from the surface still counted as inside, meters.
    pub surface_tol: f64,
    /// Keep only the largest spatially connected group of seeds.
    pub seed_component: bool,
    /// Radius of the seed graph; `None` uses twice the median
    /// nearest-neighbor spacing among the seeds.
    pub component_radius: Option<f64>,
    /// Skip candidate-seed pairs farther apart than this. `None` tests every pair.
    pub pair_cutoff: Option<f64>,
    pub inside_test: InsideTest,
    pub calibration: Calibration,
}

impl Default for SgcrConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            tau: 0.01,
            seed_fraction: 0.10,
            neighbors: Neighbors::AllOthers,
            convexity_samples: 16,
            surface_tol: 1e-3,
            seed_component: true,
            component_radius: None,
            pair_cutoff: None,
            inside_test: InsideTest::RayParity,
            calibration: Calibration::default(),
        }
    }
}

impl SgcrConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.seed_fraction > 0.0 && self.seed_fraction <= 1.0) {
            return bad(format!("seed_fraction must lie in (0, 1], got {}", self.seed_fraction));
        }
        if self.convexity_samples < 2 {
            return bad(format!(
                "convexity_samples must be at least 2, got {}",
                self.convexity_samples
            ));
        }
        if !(self.surface_tol.is_finite() && self.surface_tol >= 0.0) {
            return bad(format!("surface_tol must be non-negative, got {}", self.surface_tol));
        }
        if let Some(r) = self.component_radius {
            if !(r.is_finite() && r >= 0.0) {
                return bad(format!("component_radius must be non-negative, got {r}"));
            }
        }
        if let Some(c) = self.pair_cutoff {
            if !(c > 0.0) {
                return bad(format!("pair_cutoff must be positive, got {c}"));
            }
        }
        self.calibration.validate()
    }
}
