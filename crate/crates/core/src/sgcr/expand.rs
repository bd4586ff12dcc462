use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cloud::ScoredCloud;
use super::config::SgcrConfig;
use crate::error::{Error, Result};
use crate::geometry::{TriangleMesh, Vec3};

/// Final scored contact points for one intent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactMap {
    pub intent_id: usize,
    pub points: Vec<Vec3>,
    pub scores: Vec<f64>,
    /// Positions in `points` that are seeds, ascending.
    pub seed_indices: Vec<usize>,
}

impl ContactMap {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seeds(&self) -> impl Iterator<Item = &Vec3> {
        self.seed_indices.iter().map(|&i| &self.points[i])
    }

    /// Squared distance from `p` to the nearest map point.
    pub fn nearest_distance_squared(&self, p: &Vec3) -> Option<f64> {
        self.points
            .iter()
            .map(|q| (q - p).norm_squared())
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpandStats {
    pub candidates: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// Candidate-seed pairs skipped by the distance cutoff.
    pub pruned_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub map: ContactMap,
    /// Cloud index of every map point, ascending.
    pub kept: Vec<usize>,
    /// For each kept non-seed point, the cloud index of the seed that accepted it.
    pub witnesses: Vec<(usize, usize)>,
    pub stats: ExpandStats,
}

/// How many of the nearest seeds are tried before the rest.
const NEAREST_FIRST: usize = 8;

/// Keeps the seeds plus every other point that forms a convex pair with at
/// least one seed. Candidates are tested against seeds only, never against
/// each other.
pub fn convexity_expand(
    cloud: &ScoredCloud,
    seeds: &[usize],
    mesh: &TriangleMesh,
    intent_id: usize,
    cfg: &SgcrConfig,
) -> Result<Expansion> {
    if !mesh.is_watertight() {
        return Err(Error::Topology("convexity test needs a watertight mesh".into()));
    }
    if seeds.is_empty() {
        return Err(Error::EmptyInput("no seeds to expand from"));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s >= cloud.len()) {
        return Err(Error::InvalidConfig(format!(
            "seed index {bad} out of range for {} points",
            cloud.len()
        )));
    }
    let mut is_seed = vec![false; cloud.len()];
    for &s in seeds {
        is_seed[s] = true;
    }
    let seed_pts: Vec<(usize, Vec3)> = {
        let mut v: Vec<usize> = seeds.to_vec();
        v.sort_unstable();
        v.dedup();
        v.into_iter().map(|s| (s, cloud.points[s])).collect()
    };
    let candidates: Vec<usize> = (0..cloud.len()).filter(|&i| !is_seed[i]).collect();

    let outcomes: Vec<Result<(Option<usize>, usize)>> = candidates
        .par_iter()
        .map(|&c| test_candidate(&cloud.points[c], &seed_pts, mesh, cfg))
        .collect();

    let mut stats = ExpandStats {
        candidates: candidates.len(),
        ..ExpandStats::default()
    };
    let mut accepted = vec![false; cloud.len()];
    let mut witnesses = Vec::new();
    for (&c, outcome) in candidates.iter().zip(outcomes) {
        let (witness, pruned) = outcome?;
        stats.pruned_pairs += pruned;
        match witness {
            Some(s) => {
                accepted[c] = true;
                stats.accepted += 1;
                witnesses.push((c, s));
            }
            None => stats.rejected += 1,
        }
    }

    let kept: Vec<usize> = (0..cloud.len()).filter(|&i| is_seed[i] || accepted[i]).collect();
    let seed_indices = kept
        .iter()
        .enumerate()
        .filter(|(_, &i)| is_seed[i])
        .map(|(pos, _)| pos)
        .collect();
    let map = ContactMap {
        intent_id,
        points: kept.iter().map(|&i| cloud.points[i]).collect(),
        scores: kept.iter().map(|&i| cloud.scores[i]).collect(),
        seed_indices,
    };
    Ok(Expansion {
        map,
        kept,
        witnesses,
        stats,
    })
}

/// Returns the accepting seed, if any, and the number of pruned pairs.
fn test_candidate(
    q: &Vec3,
    seeds: &[(usize, Vec3)],
    mesh: &TriangleMesh,
    cfg: &SgcrConfig,
) -> Result<(Option<usize>, usize)> {
    let mut by_distance: Vec<(f64, usize)> = seeds
        .iter()
        .enumerate()
        .map(|(k, (_, p))| ((p - q).norm_squared(), k))
        .collect();
    let head = NEAREST_FIRST.min(by_distance.len());
    if head < by_distance.len() {
        by_distance.select_nth_unstable_by(head, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }
    by_distance[..head].sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    by_distance[head..].sort_by_key(|&(_, k)| k);

    let cutoff2 = cfg.pair_cutoff.map(|c| c * c);
    let mut pruned = 0;
    for &(d2, k) in &by_distance {
        if cutoff2.is_some_and(|c2| d2 > c2) {
            pruned += 1;
            continue;
        }
        let (seed_idx, p) = seeds[k];
        if mesh.segment_inside_with(q, &p, cfg.convexity_samples, cfg.surface_tol, cfg.inside_test)? {
            return Ok((Some(seed_idx), pruned));
        }
    }
    Ok((None, pruned))
}
