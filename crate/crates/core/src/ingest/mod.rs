//! Proposal documents, intent masks, and initial confidence maps.

pub mod confidence;
pub mod mask;
pub mod proposals;
pub mod scene;

pub use confidence::{
    calibrate_confidence, calibrate_confidence_with, init_confidence_map, logistic,
    valid_region_ratio, Calibration, ConfidenceMap, Stage,
};
pub use mask::{filter_mask, mask_file_name, read_pgm, write_pgm, MaskImage};
pub use proposals::{load_proposals, read_proposals, write_proposals, BBox, IntentProposal, ProposalSet, ViewEntry};
pub use scene::{IntentInputs, Scene, ViewInput};
