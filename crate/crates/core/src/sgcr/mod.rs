//! Cross-view support, global normalization, lifting to a scored cloud,
//! seed selection, and convex-pair expansion into a contact map.

pub mod cloud;
pub mod config;
pub mod expand;
pub mod io;
pub mod pipeline;
pub mod refine;
pub mod seeds;

pub use cloud::{lift_to_3d, Provenance, ScoredCloud};
pub use config::{Neighbors, SgcrConfig};
pub use expand::{convexity_expand, ContactMap, ExpandStats, Expansion};
pub use pipeline::{run_sgcr, SgcrDiagnostics, SgcrOutput};
pub use refine::{cross_view_refine, cross_view_support, neighbor_indices, normalize_global, SupportStats};
pub use seeds::{rank_points, seed_count, select_seeds, SeedSelection};
