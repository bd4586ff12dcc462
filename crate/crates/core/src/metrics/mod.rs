//! Grasp success, affordance distance, intent success, style diversity, and
//! hand-surface coverage over episode logs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{TriangleMesh, Vec3};
use crate::reward::EpisodeLog;
use crate::sgcr::ContactMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SadMode {
    #[default]
    Mean,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalCriteria {
    /// Object-goal distance for a successful step, meters (exclusive).
    pub success_radius: f64,
    /// Consecutive successful steps required.
    pub hold_steps: usize,
    /// SAD below which a success also counts as intent success, meters (exclusive).
    pub isr_threshold: f64,
    pub sad_mode: SadMode,
    /// Coverage bands, meters.
    pub coverage_taus: Vec<f64>,
}

impl Default for EvalCriteria {
    fn default() -> Self {
        Self {
            success_radius: 0.05,
            hold_steps: 20,
            isr_threshold: 0.04,
            sad_mode: SadMode::Mean,
            coverage_taus: vec![0.002, 0.005],
        }
    }
}

/// Whether the object stays strictly within `radius` of the goal for `hold`
/// consecutive steps somewhere in the episode.
pub fn episode_success(log: &EpisodeLog, radius: f64, hold: usize) -> bool {
    let mut run = 0usize;
    for s in &log.snapshots {
        if (s.object - s.goal).norm() < radius {
            run += 1;
            if run >= hold {
                return true;
            }
        } else {
            run = 0;
        }
    }
    hold == 0
}

fn successes(logs: &[EpisodeLog], c: &EvalCriteria) -> Vec<bool> {
    logs.iter()
        .map(|l| episode_success(l, c.success_radius, c.hold_steps))
        .collect()
}

/// Fraction of successful episodes.
pub fn gsr(logs: &[EpisodeLog], c: &EvalCriteria) -> Result<f64> {
    if logs.is_empty() {
        return Err(Error::EmptyInput("no episodes"));
    }
    let n = successes(logs, c).iter().filter(|&&s| s).count();
    Ok(n as f64 / logs.len() as f64)
}

fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Distance from each recorded final contact to the nearest map point,
/// aggregated by `mode`.
pub fn sad(log: &EpisodeLog, map: &ContactMap, mode: SadMode) -> Result<f64> {
    let contacts = log
        .final_contacts()
        .filter(|c| !c.is_empty())
        .ok_or(Error::MissingContact)?;
    if map.is_empty() {
        return Err(Error::Assignment("contact map is empty".into()));
    }
    let dists: Vec<f64> = contacts
        .iter()
        .map(|c| {
            map.nearest_distance_squared(c)
                .expect("map is non-empty")
                .sqrt()
        })
        .collect();
    Ok(match mode {
        SadMode::Mean => {
            let n = dists.len() as f64;
            sorted_sum(dists) / n
        }
        SadMode::Min => dists.into_iter().fold(f64::INFINITY, f64::min),
    })
}

fn check_aligned(logs: &[EpisodeLog], maps: &[&ContactMap]) -> Result<()> {
    if logs.len() != maps.len() {
        return Err(Error::Shape(format!(
            "{} episodes but {} contact maps",
            logs.len(),
            maps.len()
        )));
    }
    if logs.is_empty() {
        return Err(Error::EmptyInput("no episodes"));
    }
    Ok(())
}

/// Per-episode SAD for successful episodes, `None` for failures.
pub fn success_sads(logs: &[EpisodeLog], maps: &[&ContactMap], c: &EvalCriteria) -> Result<Vec<Option<f64>>> {
    check_aligned(logs, maps)?;
    logs.par_iter()
        .zip(maps.par_iter())
        .map(|(log, map)| {
            if episode_success(log, c.success_radius, c.hold_steps) {
                sad(log, map, c.sad_mode).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Mean SAD over successful episodes; `None` when nothing succeeded.
/// `maps[i]` is the contact map for `logs[i]`.
pub fn msad(logs: &[EpisodeLog], maps: &[&ContactMap], c: &EvalCriteria) -> Result<Option<f64>> {
    let values: Vec<f64> = success_sads(logs, maps, c)?.into_iter().flatten().collect();
    if values.is_empty() {
        return Ok(None);
    }
    let n = values.len() as f64;
    Ok(Some(sorted_sum(values) / n))
}

/// Fraction of all episodes that succeed with SAD strictly below the
/// threshold.
pub fn isr(logs: &[EpisodeLog], maps: &[&ContactMap], c: &EvalCriteria) -> Result<f64> {
    let hits = success_sads(logs, maps, c)?
        .into_iter()
        .filter(|s| s.is_some_and(|v| v < c.isr_threshold))
        .count();
    Ok(hits as f64 / logs.len() as f64)
}

/// Mean pairwise Euclidean distance between final joint vectors of the
/// successful episodes.
pub fn style_diversity(logs: &[EpisodeLog], c: &EvalCriteria) -> Result<f64> {
    let thetas: Vec<&[f64]> = logs
        .iter()
        .zip(successes(logs, c))
        .filter(|(_, s)| *s)
        .map(|(l, _)| l.final_theta())
        .collect();
    pairwise_mean_distance(&thetas)
}

/// Mean of `‖a − b‖₂` over unordered pairs, summed in sorted order.
pub fn pairwise_mean_distance(vectors: &[&[f64]]) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "style diversity needs at least 2 successful episodes, got {}",
            vectors.len()
        )));
    }
    let dof = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dof) {
        return Err(Error::Dimension {
            expected: dof,
            actual: v.len(),
        });
    }
    let mut dists = Vec::with_capacity(vectors.len() * (vectors.len() - 1) / 2);
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let d2: f64 = vectors[i]
                .iter()
                .zip(vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    let n = dists.len() as f64;
    Ok(sorted_sum(dists) / n)
}

/// Percentage of points whose signed distance to the mesh lies in [−τ, τ].
pub fn coverage(points: &[Vec3], mesh: &TriangleMesh, tau: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no hand-surface points"));
    }
    if !mesh.is_watertight() {
        return Err(Error::Topology("coverage needs a watertight mesh".into()));
    }
    let hits: Vec<bool> = points
        .par_iter()
        .map(|p| mesh.unsigned_distance(p).map(|d| d <= tau))
        .collect::<Result<_>>()?;
    Ok(100.0 * hits.iter().filter(|&&h| h).count() as f64 / points.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub tau: f64,
    /// Mean over episodes that logged hand-surface points, percent.
    pub percent: f64,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: usize,
    pub successes: usize,
    pub gsr: f64,
    pub msad: Option<f64>,
    pub isr: f64,
    /// `None` with fewer than two successes.
    pub sd: Option<f64>,
    pub coverage: Vec<CoverageEntry>,
    pub criteria: EvalCriteria,
}

/// Every metric over one batch. `maps[i]` belongs to `logs[i]`. Coverage is
/// reported only when a mesh is given.
pub fn evaluate(
    logs: &[EpisodeLog],
    maps: &[&ContactMap],
    mesh: Option<&TriangleMesh>,
    c: &EvalCriteria,
) -> Result<EvalReport> {
    check_aligned(logs, maps)?;
    let succ = successes(logs, c);
    let successes = succ.iter().filter(|&&s| s).count();
    let sd = match style_diversity(logs, c) {
        Ok(v) => Some(v),
        Err(Error::InsufficientData(_)) => None,
        Err(e) => return Err(e),
    };
    let mut cov = Vec::new();
    if let Some(mesh) = mesh {
        for &tau in &c.coverage_taus {
            let mut values = Vec::new();
            for log in logs {
                if let Some(points) = log.final_hand_surface() {
                    values.push(coverage(points, mesh, tau)?);
                }
            }
            let episodes = values.len();
            let percent = if episodes == 0 {
                0.0
            } else {
                sorted_sum(values) / episodes as f64
            };
            cov.push(CoverageEntry {
                tau,
                percent,
                episodes,
            });
        }
    }
    Ok(EvalReport {
        episodes: logs.len(),
        successes,
        gsr: successes as f64 / logs.len() as f64,
        msad: msad(logs, maps, c)?,
        isr: isr(logs, maps, c)?,
        sd,
        coverage: cov,
        criteria: c.clone(),
    })
}
