use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{PipelineConfig, ThumbSideSetting};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::handkin::{
    default_initial_pose, forward_kinematics, load_chain, partition_regions, solve_ik, sorted_centroid,
    HandConfiguration, KinematicChain, ThumbSide,
};
use crate::ingest::Scene;
use crate::sgcr::io::{contact_map_to_json, contact_map_to_ply};
use crate::sgcr::{run_sgcr, ContactMap, SgcrDiagnostics};

/// IK result written next to each contact map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoPose {
    pub intent_id: usize,
    pub chain: String,
    pub w: Vec3,
    pub phi: Vec3,
    pub theta: Vec<f64>,
    pub initial: HandConfiguration,
    pub objective_trace: Vec<f64>,
    pub fingertips: Vec<Vec3>,
    pub targets: Vec<Vec3>,
}

impl PseudoPose {
    pub fn configuration(&self) -> HandConfiguration {
        HandConfiguration::new(self.w, self.phi, self.theta.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub axis: Vec3,
    pub thumb_upper: bool,
    pub region_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentDiagnostics {
    pub sgcr: SgcrDiagnostics,
    pub partition: PartitionSummary,
    pub initial_objective: f64,
    pub final_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntentResult {
    pub map: ContactMap,
    pub pose: PseudoPose,
    pub diagnostics: IntentDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub chain: String,
    pub warnings: Vec<String>,
    pub intents: Vec<IntentDiagnostics>,
}

fn thumb_side(setting: ThumbSideSetting, chain: &KinematicChain, h0: &HandConfiguration) -> Result<ThumbSide> {
    Ok(match setting {
        ThumbSideSetting::Positive => ThumbSide::Positive,
        ThumbSideSetting::Negative => ThumbSide::Negative,
        ThumbSideSetting::Auto => {
            let Some(thumb) = chain.thumb_index() else {
                return Ok(ThumbSide::Positive);
            };
            let tips = forward_kinematics(chain, h0)?;
            let others: Vec<Vec3> = tips
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != thumb)
                .map(|(_, t)| *t)
                .collect();
            if others.is_empty() {
                return Ok(ThumbSide::Positive);
            }
            let d = tips[thumb] - sorted_centroid(&others);
            ThumbSide::Toward([d.x, d.y, d.z])
        }
    })
}

/// Contact map and pseudo pose for one intent.
pub fn run_intent(scene: &Scene, chain: &KinematicChain, intent_id: usize, cfg: &PipelineConfig) -> Result<IntentResult> {
    let out = run_sgcr(scene, intent_id, &cfg.sgcr)?;
    let points = &out.map.points;
    let h0 = default_initial_pose(chain, points, Some(&scene.mesh), cfg.initial_pose.standoff)
        .map_err(|e| e.in_stage("pose"))?;
    let side = thumb_side(cfg.initial_pose.thumb_side, chain, &h0).map_err(|e| e.in_stage("pose"))?;
    let assignment = partition_regions(points, chain, side).map_err(|e| e.in_stage("partition"))?;
    let ik = solve_ik(chain, &h0, &assignment, &cfg.ik).map_err(|e| e.in_stage("ik"))?;
    let fingertips = forward_kinematics(chain, &ik.pose).map_err(|e| e.in_stage("ik"))?;
    let diagnostics = IntentDiagnostics {
        sgcr: out.diagnostics,
        partition: PartitionSummary {
            axis: assignment.axis,
            thumb_upper: assignment.thumb_upper,
            region_sizes: assignment.regions.iter().map(Vec::len).collect(),
        },
        initial_objective: ik.trace[0],
        final_objective: *ik.trace.last().expect("trace is non-empty"),
    };
    Ok(IntentResult {
        pose: PseudoPose {
            intent_id,
            chain: chain.name.clone(),
            w: ik.pose.w,
            phi: ik.pose.phi,
            theta: ik.pose.theta,
            initial: h0,
            objective_trace: ik.trace,
            fingertips,
            targets: ik.targets,
        },
        map: out.map,
        diagnostics,
    })
}

/// Runs every intent (or only `only`) concurrently. Results are in intent
/// order.
pub fn run_pipeline(scene: &Scene, cfg: &PipelineConfig, only: Option<usize>) -> Result<Vec<IntentResult>> {
    cfg.validate()?;
    let chain = load_chain(&cfg.chain)?;
    let ids = match only {
        Some(k) if scene.proposals.intent(k).is_none() => {
            return Err(Error::InvalidConfig(format!("intent {k} is not in the proposal set")));
        }
        Some(k) => vec![k],
        None => scene.proposals.intent_ids(),
    };
    ids.par_iter().map(|&k| run_intent(scene, &chain, k, cfg)).collect()
}

pub fn contact_map_file(intent_id: usize) -> String {
    format!("contact_map_{intent_id}.json")
}

pub fn pseudo_pose_file(intent_id: usize) -> String {
    format!("pseudo_pose_{intent_id}.json")
}

/// Every output file name and its contents.
pub fn render_outputs(results: &[IntentResult], warnings: &[String]) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for r in results {
        let k = r.map.intent_id;
        files.push((contact_map_file(k), contact_map_to_json(&r.map)));
        files.push((format!("contact_map_{k}.ply"), contact_map_to_ply(&r.map)));
        files.push((
            pseudo_pose_file(k),
            serde_json::to_string_pretty(&r.pose).expect("pose serializes") + "\n",
        ));
    }
    let diagnostics = RunDiagnostics {
        chain: results.first().map(|r| r.pose.chain.clone()).unwrap_or_default(),
        warnings: warnings.to_vec(),
        intents: results.iter().map(|r| r.diagnostics.clone()).collect(),
    };
    files.push((
        "diagnostics.json".into(),
        serde_json::to_string_pretty(&diagnostics).expect("diagnostics serialize") + "\n",
    ));
    files
}

/// Writes all files into a staging directory inside `out`, then moves them
/// into place. Nothing is left behind when a write fails.
pub fn write_outputs(out: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let staging = out.join(format!(".staging-{}", std::process::id()));
    let result = (|| {
        fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        for (name, text) in files {
            let path = staging.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        let mut written = Vec::with_capacity(files.len());
        for (name, _) in files {
            let dst = out.join(name);
            fs::rename(staging.join(name), &dst).map_err(|e| Error::io(&dst, e))?;
            written.push(dst);
        }
        Ok(written)
    })();
    let _ = fs::remove_dir_all(&staging);
    result
}
