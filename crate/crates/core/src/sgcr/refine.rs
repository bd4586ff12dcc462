use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Neighbors, SgcrConfig};
use crate::error::{Error, Result};
use crate::geometry::{pixel_center, transfer_pixel, CameraView};
use crate::ingest::{ConfidenceMap, MaskImage, Stage};

/// Indices of the views that support view `i` out of `n`.
pub fn neighbor_indices(n: usize, i: usize, policy: Neighbors) -> Vec<usize> {
    match policy {
        Neighbors::AllOthers => (0..n).filter(|&j| j != i).collect(),
        Neighbors::Adjacent => {
            let mut out = Vec::new();
            if n > 1 {
                out.push((i + n - 1) % n);
                let next = (i + 1) % n;
                if !out.contains(&next) {
                    out.push(next);
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SupportStats {
    /// Source mask pixels that were transferred.
    pub pixels_tested: usize,
    /// Source pixels that gained support from at least one neighbor.
    pub supported_pixels: usize,
    /// Total (pixel, neighbor) agreements.
    pub support_events: usize,
}

/// Adds `alpha·c̄_j` to every filtered-mask pixel of view `i` whose
/// transfer into neighbor `j` is depth-consistent and lands in `j`'s
/// filtered mask. All slices are aligned by position.
pub fn cross_view_refine(
    maps: &[ConfidenceMap],
    views: &[CameraView],
    filtered: &[MaskImage],
    cbar: &[f64],
    cfg: &SgcrConfig,
) -> Result<Vec<ConfidenceMap>> {
    cross_view_support(maps, views, filtered, cbar, cfg).map(|(m, _)| m)
}

pub fn cross_view_support(
    maps: &[ConfidenceMap],
    views: &[CameraView],
    filtered: &[MaskImage],
    cbar: &[f64],
    cfg: &SgcrConfig,
) -> Result<(Vec<ConfidenceMap>, SupportStats)> {
    let n = maps.len();
    if views.len() != n || filtered.len() != n || cbar.len() != n {
        return Err(Error::Shape(format!(
            "refinement inputs disagree: {n} maps, {} views, {} masks, {} confidences",
            views.len(),
            filtered.len(),
            cbar.len()
        )));
    }
    for (k, map) in maps.iter().enumerate() {
        if map.stage != Stage::Initial {
            return Err(Error::InvalidConfig(format!(
                "view {}: refinement expects initial maps, got {:?}",
                map.view_id, map.stage
            )));
        }
        let depth = views[k].depth()?;
        let m = &filtered[k];
        if (map.width, map.height) != (depth.width(), depth.height())
            || (m.width(), m.height()) != (depth.width(), depth.height())
        {
            return Err(Error::Shape(format!(
                "view {}: map, mask, and depth dimensions differ",
                views[k].view_id
            )));
        }
    }

    let mut stats = SupportStats::default();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let neighbors = neighbor_indices(n, i, cfg.neighbors);
        let (src, map, mask) = (&views[i], &maps[i], &filtered[i]);
        let depth = src.depth()?;
        let rows: Vec<Result<(Vec<f64>, usize, usize, usize)>> = (0..map.height)
            .into_par_iter()
            .map(|row| {
                let mut scores = map.scores[row * map.width..(row + 1) * map.width].to_vec();
                let (mut tested, mut supported, mut events) = (0, 0, 0);
                for (col, score) in scores.iter_mut().enumerate() {
                    if !mask.get(col, row) || !depth.is_valid(col, row) {
                        continue;
                    }
                    tested += 1;
                    let px = pixel_center(col, row);
                    let mut gained = false;
                    for &j in &neighbors {
                        let t = transfer_pixel(&px, src, &views[j])?;
                        let inside = t
                            .dst_pixel
                            .is_some_and(|(c, r)| filtered[j].get(c, r));
                        if t.delta < cfg.tau && inside {
                            *score += cfg.alpha * cbar[j];
                            events += 1;
                            gained = true;
                        }
                    }
                    supported += gained as usize;
                }
                Ok((scores, tested, supported, events))
            })
            .collect();
        let mut scores = Vec::with_capacity(map.scores.len());
        for r in rows {
            let (s, tested, supported, events) = r?;
            scores.extend(s);
            stats.pixels_tested += tested;
            stats.supported_pixels += supported;
            stats.support_events += events;
        }
        out.push(ConfidenceMap {
            view_id: map.view_id,
            width: map.width,
            height: map.height,
            scores,
            stage: Stage::Refined,
        });
    }
    Ok((out, stats))
}

/// Divides every score by the single maximum over all views. All-zero input
/// passes through unchanged.
pub fn normalize_global(maps: &[ConfidenceMap]) -> Vec<ConfidenceMap> {
    let max = maps.iter().map(ConfidenceMap::max).fold(0.0, f64::max);
    maps.iter()
        .map(|m| ConfidenceMap {
            scores: if max > 0.0 {
                m.scores.iter().map(|s| s / max).collect()
            } else {
                m.scores.clone()
            },
            stage: Stage::Normalized,
            ..m.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_policies() {
        assert_eq!(neighbor_indices(4, 0, Neighbors::AllOthers), vec![1, 2, 3]);
        assert_eq!(neighbor_indices(4, 0, Neighbors::Adjacent), vec![3, 1]);
        assert_eq!(neighbor_indices(2, 1, Neighbors::Adjacent), vec![0]);
        assert!(neighbor_indices(1, 0, Neighbors::Adjacent).is_empty());
    }

    fn map(view_id: usize, scores: Vec<f64>) -> ConfidenceMap {
        ConfidenceMap {
            view_id,
            width: scores.len(),
            height: 1,
            scores,
            stage: Stage::Refined,
        }
    }

    #[test]
    fn normalization_uses_one_global_max() {
        let out = normalize_global(&[map(0, vec![0.8, 0.2]), map(1, vec![0.4, 0.0])]);
        assert_eq!(out[0].scores, vec![1.0, 0.25]);
        assert_eq!(out[1].scores, vec![0.5, 0.0]);
        assert!(out.iter().all(|m| m.stage == Stage::Normalized));
        let zeros = normalize_global(&[map(0, vec![0.0; 3])]);
        assert_eq!(zeros[0].scores, vec![0.0; 3]);
        let single = normalize_global(&[map(0, vec![0.0, 0.4])]);
        assert_eq!(single[0].scores, vec![0.0, 1.0]);
    }
}
