use serde::{Deserialize, Serialize};

use super::cloud::lift_to_3d;
use super::config::SgcrConfig;
use super::expand::{convexity_expand, ContactMap, ExpandStats};
use super::refine::{cross_view_support, normalize_global, SupportStats};
use super::seeds::select_seeds;
use crate::error::{Error, Result};
use crate::ingest::Scene;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewDiagnostics {
    pub view_id: usize,
    pub visible: bool,
    pub filtered_pixels: usize,
    pub rho: Option<f64>,
    pub confidence: f64,
    pub calibrated_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgcrDiagnostics {
    pub intent_id: usize,
    pub views: Vec<ViewDiagnostics>,
    pub support: SupportStats,
    /// Largest refined score before normalization.
    pub refined_max: f64,
    pub lifted_points: usize,
    pub skipped_without_depth: usize,
    pub off_surface_dropped: usize,
    pub ranked_seeds: usize,
    pub seeds: usize,
    pub seed_components: usize,
    pub component_radius: Option<f64>,
    pub expansion: ExpandStats,
    pub final_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgcrOutput {
    pub map: ContactMap,
    pub diagnostics: SgcrDiagnostics,
}

/// Filters and calibrates the proposals, refines across views, normalizes,
/// lifts to 3D, drops points farther than `surface_tol` from the mesh,
/// selects seeds, and expands them by the convex-pair test.
pub fn run_sgcr(scene: &Scene, intent_id: usize, cfg: &SgcrConfig) -> Result<SgcrOutput> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    if !scene.mesh.is_watertight() {
        return Err(Error::Topology("object mesh is not watertight".into()).in_stage("config"));
    }
    let inputs = scene
        .prepare_intent(intent_id, &cfg.calibration)
        .map_err(|e| e.in_stage("ingest"))?;

    let maps: Vec<_> = inputs.views.iter().map(|v| v.initial.clone()).collect();
    let masks: Vec<_> = inputs.views.iter().map(|v| v.filtered.clone()).collect();
    let cbar: Vec<_> = inputs.views.iter().map(|v| v.cbar).collect();
    let (refined, support) = cross_view_support(&maps, &scene.views, &masks, &cbar, cfg)
        .map_err(|e| e.in_stage("refine"))?;
    let refined_max = refined.iter().map(|m| m.max()).fold(0.0, f64::max);
    let normalized = normalize_global(&refined);

    let (lifted, skipped) = lift_to_3d(&normalized, &scene.views).map_err(|e| e.in_stage("lift"))?;
    let lifted_points = lifted.len();
    let mut near = Vec::with_capacity(lifted.len());
    for p in &lifted.points {
        let d = scene.mesh.unsigned_distance(p).map_err(|e| e.in_stage("lift"))?;
        near.push(d <= cfg.surface_tol);
    }
    let cloud = lifted.retain_indices(|i| near[i]);

    let seeds = select_seeds(&cloud, cfg).map_err(|e| e.in_stage("seed"))?;
    let expansion = convexity_expand(&cloud, &seeds.indices, &scene.mesh, intent_id, cfg)
        .map_err(|e| e.in_stage("expand"))?;

    let views = inputs
        .views
        .iter()
        .map(|v| ViewDiagnostics {
            view_id: v.view_id,
            visible: v.rho.is_some(),
            filtered_pixels: v.filtered.count(),
            rho: v.rho,
            confidence: v.raw_confidence,
            calibrated_confidence: v.cbar,
        })
        .collect();
    let diagnostics = SgcrDiagnostics {
        intent_id,
        views,
        support,
        refined_max,
        lifted_points,
        skipped_without_depth: skipped,
        off_surface_dropped: lifted_points - cloud.len(),
        ranked_seeds: seeds.ranked,
        seeds: seeds.indices.len(),
        seed_components: seeds.components,
        component_radius: seeds.component_radius,
        expansion: expansion.stats.clone(),
        final_points: expansion.map.len(),
    };
    Ok(SgcrOutput {
        map: expansion.map,
        diagnostics,
    })
}
