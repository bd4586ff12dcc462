use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::handkin::{IkParams, DEFAULT_STANDOFF};
use crate::metrics::EvalCriteria;
use crate::reward::RewardConfig;
use crate::sgcr::SgcrConfig;

/// How the thumb half of the contact map is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThumbSideSetting {
    /// The half the thumb tip points into at the initial pose, measured
    /// from the mean of the other fingertips.
    #[default]
    Auto,
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialPoseConfig {
    /// Wrist distance from the contact centroid along the outward normal, meters.
    pub standoff: f64,
    pub thumb_side: ThumbSideSetting,
}

impl Default for InitialPoseConfig {
    fn default() -> Self {
        Self {
            standoff: DEFAULT_STANDOFF,
            thumb_side: ThumbSideSetting::Auto,
        }
    }
}

/// Every tunable of the pipeline in one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sgcr: SgcrConfig,
    pub ik: IkParams,
    pub initial_pose: InitialPoseConfig,
    pub reward: RewardConfig,
    pub eval: EvalCriteria,
    /// `builtin:shadow`, `builtin:allegro`, `builtin:planar`, or a path to a
    /// chain document (relative paths resolve against the config file).
    pub chain: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sgcr: SgcrConfig::default(),
            ik: IkParams::default(),
            initial_pose: InitialPoseConfig::default(),
            reward: RewardConfig::default(),
            eval: EvalCriteria::default(),
            chain: "builtin:shadow".into(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.sgcr.validate()?;
        self.ik.validate()?;
        self.reward.validate()?;
        if !(self.initial_pose.standoff.is_finite() && self.initial_pose.standoff >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "standoff must be non-negative, got {}",
                self.initial_pose.standoff
            )));
        }
        let e = &self.eval;
        if !(e.success_radius > 0.0 && e.isr_threshold > 0.0) || e.coverage_taus.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::InvalidConfig("evaluation thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::json(source_name, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config document; a relative chain path is made relative to
    /// the document's directory.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        if !cfg.chain.starts_with("builtin:") && Path::new(&cfg.chain).is_relative() {
            if let Some(dir) = path.parent() {
                cfg.chain = dir.join(&cfg.chain).display().to_string();
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
