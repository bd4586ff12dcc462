use serde::{Deserialize, Serialize};

use super::mask::MaskImage;
use super::proposals::BBox;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Initial,
    Refined,
    Normalized,
}

/// Per-pixel scores for one intent in one view.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMap {
    pub view_id: usize,
    pub width: usize,
    pub height: usize,
    pub scores: Vec<f64>,
    pub stage: Stage,
}

impl ConfidenceMap {
    pub fn zeros(view_id: usize, width: usize, height: usize, stage: Stage) -> Self {
        Self {
            view_id,
            width,
            height,
            scores: vec![0.0; width * height],
            stage,
        }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.scores[row * self.width + col]
    }

    pub fn max(&self) -> f64 {
        self.scores.iter().copied().fold(0.0, f64::max)
    }

    pub fn nonzero_count(&self) -> usize {
        self.scores.iter().filter(|&&s| s > 0.0).count()
    }
}

/// Optional affine pre-scaling inside the logistic: `σ(scale·(ρ − bias))`.
/// The defaults leave the plain logistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Calibration {
    pub scale: f64,
    pub bias: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            scale: 1.0,
            bias: 0.0,
        }
    }
}

impl Calibration {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale >= 0.0 && self.bias.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "calibration scale must be finite and non-negative and bias finite, got {self:?}"
            )));
        }
        Ok(())
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Fraction of the box's pixels that belong to the filtered mask. Box pixels
/// outside the image count toward the area but never toward the overlap.
pub fn valid_region_ratio(filtered: &MaskImage, bbox: &BBox) -> Result<f64> {
    let area = bbox.pixel_area();
    if !bbox.is_valid() || area == 0 {
        return Err(Error::DegenerateBox(bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max));
    }
    let (cols, rows) = bbox.pixel_ranges();
    let clip = |r: std::ops::Range<i64>, n: usize| r.start.max(0) as usize..r.end.clamp(0, n as i64) as usize;
    let (cols, rows) = (clip(cols, filtered.width()), clip(rows, filtered.height()));
    let mut hits = 0usize;
    for row in rows {
        for col in cols.clone() {
            hits += filtered.get(col, row) as usize;
        }
    }
    Ok(hits as f64 / area as f64)
}

/// `c̄ = σ(ρ)·c`. Inputs are clamped to [0, 1].
pub fn calibrate_confidence(c: f64, rho: f64) -> f64 {
    calibrate_confidence_with(c, rho, &Calibration::default())
}

pub fn calibrate_confidence_with(c: f64, rho: f64, cal: &Calibration) -> f64 {
    let c = c.clamp(0.0, 1.0);
    let rho = rho.clamp(0.0, 1.0);
    logistic(cal.scale * (rho - cal.bias)) * c
}

/// Assigns `c̄` to every filtered-mask pixel and zero elsewhere.
pub fn init_confidence_map(view_id: usize, filtered: &MaskImage, cbar: f64) -> ConfidenceMap {
    let scores = filtered
        .data()
        .iter()
        .map(|&m| if m { cbar } else { 0.0 })
        .collect();
    ConfidenceMap {
        view_id,
        width: filtered.width(),
        height: filtered.height(),
        scores,
        stage: Stage::Initial,
    }
}
