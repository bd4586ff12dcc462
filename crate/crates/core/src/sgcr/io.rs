use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::expand::ContactMap;
use crate::error::{Error, Result};

pub fn contact_map_to_json(map: &ContactMap) -> String {
    serde_json::to_string_pretty(map).expect("contact map serializes") + "\n"
}

pub fn read_contact_map(path: &Path) -> Result<ContactMap> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let map: ContactMap =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    if map.points.len() != map.scores.len() {
        return Err(Error::parse(
            path.display().to_string(),
            "scores",
            format!("{} points but {} scores", map.points.len(), map.scores.len()),
        ));
    }
    if let Some(&bad) = map.seed_indices.iter().find(|&&i| i >= map.points.len()) {
        return Err(Error::parse(
            path.display().to_string(),
            "seed_indices",
            format!("seed index {bad} out of range"),
        ));
    }
    Ok(map)
}

/// ASCII PLY with a per-vertex `confidence` and `seed` flag.
pub fn contact_map_to_ply(map: &ContactMap) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "ply\nformat ascii 1.0\ncomment intent {}\nelement vertex {}\n\
         property double x\nproperty double y\nproperty double z\n\
         property double confidence\nproperty uchar seed\nend_header\n",
        map.intent_id,
        map.points.len()
    );
    let mut is_seed = vec![false; map.points.len()];
    for &s in &map.seed_indices {
        is_seed[s] = true;
    }
    for (i, p) in map.points.iter().enumerate() {
        let _ = writeln!(out, "{} {} {} {} {}", p.x, p.y, p.z, map.scores[i], is_seed[i] as u8);
    }
    out
}
