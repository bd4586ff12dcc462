use std::collections::{BTreeMap, BTreeSet};

use super::confidence::{
    calibrate_confidence_with, init_confidence_map, valid_region_ratio, Calibration, ConfidenceMap,
};
use super::mask::{filter_mask, MaskImage};
use super::proposals::ProposalSet;
use crate::error::{Error, Result};
use crate::geometry::{CameraView, TriangleMesh};

/// Everything the refinement needs for one object.
#[derive(Debug, Clone)]
pub struct Scene {
    pub mesh: TriangleMesh,
    /// Sorted by `view_id`.
    pub views: Vec<CameraView>,
    pub proposals: ProposalSet,
    /// Keyed by `(view_id, intent_id)`.
    pub masks: BTreeMap<(usize, usize), MaskImage>,
}

/// Ingested state of one intent in one view.
#[derive(Debug, Clone)]
pub struct ViewInput {
    pub view_id: usize,
    pub filtered: MaskImage,
    /// Overlap ratio ρ, when the intent is visible in this view.
    pub rho: Option<f64>,
    pub raw_confidence: f64,
    pub cbar: f64,
    pub initial: ConfidenceMap,
}

#[derive(Debug, Clone)]
pub struct IntentInputs {
    pub intent_id: usize,
    pub views: Vec<ViewInput>,
}

impl Scene {
    pub fn new(
        mesh: TriangleMesh,
        mut views: Vec<CameraView>,
        proposals: ProposalSet,
        masks: BTreeMap<(usize, usize), MaskImage>,
    ) -> Result<Self> {
        views.sort_by_key(|v| v.view_id);
        let mut ids = BTreeSet::new();
        for v in &views {
            if !ids.insert(v.view_id) {
                return Err(Error::InvalidConfig(format!("duplicate view_id {}", v.view_id)));
            }
        }
        Ok(Self {
            mesh,
            views,
            proposals,
            masks,
        })
    }

    pub fn view(&self, view_id: usize) -> Option<&CameraView> {
        self.views.iter().find(|v| v.view_id == view_id)
    }

    /// Filters masks against depth, measures box overlap, calibrates the
    /// confidences, and builds the initial maps for every view. Views where
    /// the intent is not visible get an empty mask and zero confidence.
    pub fn prepare_intent(&self, intent_id: usize, cal: &Calibration) -> Result<IntentInputs> {
        let intent = self.proposals.intent(intent_id).ok_or_else(|| {
            Error::InvalidConfig(format!("intent {intent_id} is not in the proposal set"))
        })?;
        let mut views = Vec::with_capacity(self.views.len());
        for view in &self.views {
            let depth = view.depth()?;
            let (w, h) = (depth.width(), depth.height());
            let input = match intent.visible_entry(view.view_id) {
                Some(entry) => {
                    let mask = self
                        .masks
                        .get(&(view.view_id, intent_id))
                        .ok_or(Error::MissingMask {
                            view_id: view.view_id,
                            intent_id,
                        })?;
                    let filtered = filter_mask(mask, depth)?;
                    let rho = valid_region_ratio(&filtered, &entry.bbox)?;
                    let cbar = calibrate_confidence_with(entry.confidence, rho, cal);
                    let initial = init_confidence_map(view.view_id, &filtered, cbar);
                    ViewInput {
                        view_id: view.view_id,
                        filtered,
                        rho: Some(rho),
                        raw_confidence: entry.confidence,
                        cbar,
                        initial,
                    }
                }
                None => {
                    let filtered = MaskImage::empty(w, h);
                    let initial = init_confidence_map(view.view_id, &filtered, 0.0);
                    ViewInput {
                        view_id: view.view_id,
                        filtered,
                        rho: None,
                        raw_confidence: 0.0,
                        cbar: 0.0,
                        initial,
                    }
                }
            };
            views.push(input);
        }
        Ok(IntentInputs { intent_id, views })
    }
}
