use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{back_project, pixel_center, CameraView, Vec3};
use crate::ingest::ConfidenceMap;

/// Source pixel of a lifted point. Ordered by view, then row, then column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub view_id: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoredCloud {
    pub points: Vec<Vec3>,
    pub scores: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

impl ScoredCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, point: Vec3, score: f64, provenance: Provenance) {
        self.points.push(point);
        self.scores.push(score);
        self.provenance.push(provenance);
    }

    /// Keeps the points whose index passes `keep`, preserving order.
    pub fn retain_indices(&self, mut keep: impl FnMut(usize) -> bool) -> ScoredCloud {
        let mut out = ScoredCloud::default();
        for i in 0..self.len() {
            if keep(i) {
                out.push(self.points[i], self.scores[i], self.provenance[i]);
            }
        }
        out
    }
}

/// Back-projects every positive-score pixel that has depth. Returns the
/// cloud and the number of positive pixels skipped for lack of depth.
pub fn lift_to_3d(maps: &[ConfidenceMap], views: &[CameraView]) -> Result<(ScoredCloud, usize)> {
    let mut cloud = ScoredCloud::default();
    let mut skipped = 0usize;
    for map in maps {
        let view = views
            .iter()
            .find(|v| v.view_id == map.view_id)
            .ok_or_else(|| Error::InvalidConfig(format!("no view with id {}", map.view_id)))?;
        let depth = view.depth()?;
        if (depth.width(), depth.height()) != (map.width, map.height) {
            return Err(Error::Shape(format!(
                "view {}: map is {}x{} but depth is {}x{}",
                map.view_id,
                map.width,
                map.height,
                depth.width(),
                depth.height()
            )));
        }
        for row in 0..map.height {
            for col in 0..map.width {
                let score = map.get(col, row);
                if !(score > 0.0) {
                    continue;
                }
                let Some(d) = depth.get(col, row) else {
                    skipped += 1;
                    continue;
                };
                let p = back_project(&view.camera, &pixel_center(col, row), d)?;
                cloud.push(
                    p,
                    score,
                    Provenance {
                        view_id: map.view_id,
                        row,
                        col,
                    },
                );
            }
        }
    }
    Ok((cloud, skipped))
}
