use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::cloud::ScoredCloud;
use super::config::SgcrConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSelection {
    /// Cloud indices of the seeds, ascending.
    pub indices: Vec<usize>,
    /// Size of the top-fraction set before any component filtering.
    pub ranked: usize,
    /// Radius used for the component graph, when that step ran.
    pub component_radius: Option<f64>,
    /// Number of connected groups among the ranked seeds.
    pub components: usize,
}

/// Cloud indices sorted by score descending, then provenance ascending.
pub fn rank_points(cloud: &ScoredCloud) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    order.sort_by(|&a, &b| {
        cloud.scores[b]
            .total_cmp(&cloud.scores[a])
            .then_with(|| cloud.provenance[a].cmp(&cloud.provenance[b]))
            .then(a.cmp(&b))
    });
    order
}

/// `ceil(fraction·n)`, at least one and at most `n`.
pub fn seed_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n.max(1))
}

/// Takes the top `seed_fraction` of points by score, then (when enabled)
/// keeps only the largest group connected under the component radius.
/// Ties between equal groups go to the one holding the best-ranked seed.
pub fn select_seeds(cloud: &ScoredCloud, cfg: &SgcrConfig) -> Result<SeedSelection> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("no lifted points to select seeds from"));
    }
    let k = seed_count(cloud.len(), cfg.seed_fraction);
    let top: Vec<usize> = rank_points(cloud).into_iter().take(k).collect();
    if !cfg.seed_component || k == 1 {
        let mut indices = top;
        indices.sort_unstable();
        return Ok(SeedSelection {
            indices,
            ranked: k,
            component_radius: None,
            components: 1,
        });
    }
    let pts: Vec<_> = top.iter().map(|&i| cloud.points[i]).collect();
    let radius = cfg
        .component_radius
        .unwrap_or_else(|| 2.0 * median_nn_spacing(&pts));
    let mut uf = UnionFind::new(k);
    let r2 = radius * radius;
    for a in 0..k {
        for b in a + 1..k {
            if (pts[a] - pts[b]).norm_squared() <= r2 {
                uf.union(a, b);
            }
        }
    }
    // size and best rank per root; `top` is already in rank order
    let mut size = vec![0usize; k];
    let mut best = vec![usize::MAX; k];
    for rank in 0..k {
        let root = uf.find(rank);
        size[root] += 1;
        best[root] = best[root].min(rank);
    }
    let components = (0..k).filter(|&r| size[r] > 0).count();
    let winner = (0..k)
        .filter(|&r| size[r] > 0)
        .max_by(|&a, &b| size[a].cmp(&size[b]).then(best[b].cmp(&best[a])))
        .expect("at least one component");
    let mut indices: Vec<usize> = (0..k)
        .filter(|&rank| uf.find(rank) == winner)
        .map(|rank| top[rank])
        .collect();
    indices.sort_unstable();
    Ok(SeedSelection {
        indices,
        ranked: k,
        component_radius: Some(radius),
        components,
    })
}

fn median_nn_spacing(pts: &[crate::geometry::Vec3]) -> f64 {
    let mut nn: Vec<f64> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            pts.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let m = nn.len();
    if m % 2 == 1 {
        nn[m / 2]
    } else {
        0.5 * (nn[m / 2 - 1] + nn[m / 2])
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // lower index becomes the root so roots are stable
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}
