use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::handkin::HandConfiguration;

/// One simulator timestep. Stored one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimStateSnapshot {
    pub t: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent_id: Option<usize>,
    pub hand: HandConfiguration,
    pub fingertips: Vec<Vec3>,
    pub object: Vec3,
    /// Pseudo-pose reference state.
    pub reference: HandConfiguration,
    pub goal: Vec3,
    /// Fingertip positions counted as touching the object at this step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contacts: Option<Vec<Vec3>>,
    /// Sampled hand-surface points, for coverage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hand_surface: Option<Vec<Vec3>>,
}

/// Ordered snapshots of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub name: String,
    pub snapshots: Vec<SimStateSnapshot>,
}

impl EpisodeLog {
    pub fn new(name: impl Into<String>, snapshots: Vec<SimStateSnapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptyInput("episode log has no snapshots"));
        }
        let dof = snapshots[0].hand.theta.len();
        if let Some(s) = snapshots.iter().find(|s| s.hand.theta.len() != dof) {
            return Err(Error::Dimension {
                expected: dof,
                actual: s.hand.theta.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            snapshots,
        })
    }

    pub fn last(&self) -> &SimStateSnapshot {
        self.snapshots.last().expect("logs are non-empty")
    }

    pub fn final_theta(&self) -> &[f64] {
        &self.last().hand.theta
    }

    pub fn intent_id(&self) -> Option<usize> {
        self.snapshots.iter().find_map(|s| s.intent_id)
    }

    /// Contacts recorded at the final grasp step: the last snapshot that
    /// carries a `contacts` field.
    pub fn final_contacts(&self) -> Option<&[Vec3]> {
        self.snapshots.iter().rev().find_map(|s| s.contacts.as_deref())
    }

    pub fn final_hand_surface(&self) -> Option<&[Vec3]> {
        self.snapshots.iter().rev().find_map(|s| s.hand_surface.as_deref())
    }
}

pub fn parse_log(text: &str, name: &str) -> Result<EpisodeLog> {
    let mut snapshots = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let snap: SimStateSnapshot = serde_json::from_str(line).map_err(|e| {
            Error::parse(name, format!("line {}, column {}", lineno + 1, e.column()), e.to_string())
        })?;
        snapshots.push(snap);
    }
    EpisodeLog::new(name, snapshots)
}

pub fn read_log(path: &Path) -> Result<EpisodeLog> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_log(&text, &path.display().to_string())
}

pub fn format_log(log: &EpisodeLog) -> String {
    let mut out = String::new();
    for s in &log.snapshots {
        out.push_str(&serde_json::to_string(s).expect("snapshot serializes"));
        out.push('\n');
    }
    out
}
