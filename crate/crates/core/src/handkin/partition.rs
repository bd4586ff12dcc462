use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::chain::KinematicChain;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Which half of the principal axis the thumb takes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThumbSide {
    /// Points projecting above the median.
    #[default]
    Positive,
    Negative,
    /// The half the given direction points into (e.g. from the other
    /// fingertips toward the thumb tip). Falls back to `Positive` when the
    /// direction is perpendicular to the axis.
    Toward([f64; 3]),
}

/// Per-finger target sets, in fingertip declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerRegionAssignment {
    pub fingers: Vec<String>,
    pub regions: Vec<Vec<Vec3>>,
    /// Unit principal axis; its largest-magnitude component is positive.
    pub axis: Vec3,
    /// Centroid the projections are measured from.
    pub centroid: Vec3,
    /// Projection of the first point on the upper side of the split.
    pub split: f64,
    /// Whether the thumb took the upper side.
    pub thumb_upper: bool,
}

impl FingerRegionAssignment {
    /// Same region for every finger.
    pub fn shared(chain: &KinematicChain, points: &[Vec3]) -> Self {
        Self {
            fingers: chain.fingertips.iter().map(|f| f.finger.clone()).collect(),
            regions: vec![points.to_vec(); chain.finger_count()],
            axis: Vec3::x(),
            centroid: Vec3::zeros(),
            split: 0.0,
            thumb_upper: true,
        }
    }
}

fn lex_cmp(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

/// Mean of `points`, summed in lexicographic order so the result does not
/// depend on input order.
pub fn sorted_centroid(points: &[Vec3]) -> Vec3 {
    let mut sorted = points.to_vec();
    sorted.sort_by(lex_cmp);
    sorted.iter().fold(Vec3::zeros(), |acc, p| acc + p) / sorted.len() as f64
}

fn canonical_sign(v: Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// First principal axis and centroid. Among eigenvalues tied with the
/// largest (relative 1e-9), the lexicographically greatest canonical axis
/// wins.
pub fn principal_axis(points: &[Vec3]) -> Result<(Vec3, Vec3)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no points for principal axis"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(lex_cmp);
    let c = sorted.iter().fold(Vec3::zeros(), |acc, p| acc + p) / sorted.len() as f64;
    let cov = sorted
        .iter()
        .fold(Matrix3::zeros(), |acc, p| acc + (p - c) * (p - c).transpose())
        / sorted.len() as f64;
    let eig = SymmetricEigen::new(cov);
    let top = eig.eigenvalues.max();
    let scale = sorted
        .iter()
        .map(|p| (p - c).norm_squared())
        .fold(0.0, f64::max);
    if !(top > 1e-24 && top > 1e-12 * scale) {
        return Err(Error::DegenerateGeometry(
            "contact points have no spread (rank 0)".into(),
        ));
    }
    let axis = (0..3)
        .filter(|&i| eig.eigenvalues[i] >= top * (1.0 - 1e-9))
        .map(|i| canonical_sign(eig.eigenvectors.column(i).normalize()))
        .max_by(lex_cmp)
        .expect("top eigenvalue is present");
    Ok((axis, c))
}

/// Splits the map at the median projection onto its principal axis. The
/// thumb takes one half; the other fingers split the remaining half into
/// equal-count slices along the axis in declaration order (slices overlap
/// when there are fewer points than fingers).
pub fn partition_regions(
    points: &[Vec3],
    chain: &KinematicChain,
    side: ThumbSide,
) -> Result<FingerRegionAssignment> {
    let nf = chain.finger_count();
    if points.len() < nf {
        return Err(Error::Assignment(format!(
            "{} contact points cannot cover {nf} fingers",
            points.len()
        )));
    }
    let fingers: Vec<String> = chain.fingertips.iter().map(|f| f.finger.clone()).collect();
    let Some(thumb) = chain.thumb_index().filter(|_| nf > 1) else {
        let (axis, centroid) = principal_axis(points).unwrap_or_else(|_| (Vec3::x(), sorted_centroid(points)));
        return Ok(FingerRegionAssignment {
            fingers,
            regions: vec![points.to_vec(); nf],
            axis,
            centroid,
            split: f64::NEG_INFINITY,
            thumb_upper: true,
        });
    };
    let (axis, centroid) = principal_axis(points)?;

    let mut ordered: Vec<(f64, Vec3)> = points.iter().map(|p| ((p - centroid).dot(&axis), *p)).collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));
    let half = ordered.len() / 2;
    let (lower, upper) = ordered.split_at(half);
    let thumb_upper = match side {
        ThumbSide::Positive => true,
        ThumbSide::Negative => false,
        ThumbSide::Toward(d) => Vec3::from(d).dot(&axis) >= 0.0,
    };
    let (thumb_pts, rest) = if thumb_upper { (upper, lower) } else { (lower, upper) };

    let others = nf - 1;
    let m = rest.len();
    let mut regions = vec![Vec::new(); nf];
    regions[thumb] = thumb_pts.iter().map(|(_, p)| *p).collect();
    let mut slot = 0;
    for (f, region) in regions.iter_mut().enumerate() {
        if f == thumb {
            continue;
        }
        let start = (slot * m / others).min(m - 1);
        let end = ((slot + 1) * m / others).max(start + 1).min(m);
        *region = rest[start..end].iter().map(|(_, p)| *p).collect();
        slot += 1;
    }
    Ok(FingerRegionAssignment {
        fingers,
        regions,
        axis,
        centroid,
        split: upper.first().map(|u| u.0).unwrap_or(f64::INFINITY),
        thumb_upper,
    })
}
