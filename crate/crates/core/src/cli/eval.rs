use std::fs;
use std::path::{Path, PathBuf};

use super::run::contact_map_file;
use crate::error::{Error, Result};
use crate::geometry::io::read_obj;
use crate::metrics::{evaluate, EvalCriteria, EvalReport};
use crate::reward::{read_log, EpisodeLog};
use crate::sgcr::io::read_contact_map;
use crate::sgcr::ContactMap;

fn sorted_entries(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == extension) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Every `*.jsonl` episode log in `dir`, in file-name order.
pub fn read_logs(dir: &Path) -> Result<Vec<EpisodeLog>> {
    let paths = sorted_entries(dir, "jsonl")?;
    if paths.is_empty() {
        return Err(Error::EmptyInput("no episode logs (*.jsonl) found"));
    }
    paths.iter().map(|p| read_log(p)).collect()
}

/// Evaluates each log against `contact_map_<intent>.json` in `maps_dir`,
/// picking the intent from the log. Logs without an intent need the
/// directory to hold exactly one map.
pub fn eval_dirs(
    logs_dir: &Path,
    maps_dir: &Path,
    mesh: Option<&Path>,
    criteria: &EvalCriteria,
) -> Result<EvalReport> {
    let logs = read_logs(logs_dir)?;
    let available = sorted_entries(maps_dir, "json")?
        .into_iter()
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("contact_map_"))
        })
        .collect::<Vec<_>>();
    let mut maps: Vec<ContactMap> = Vec::new();
    let mut index = Vec::with_capacity(logs.len());
    for log in &logs {
        let path = match log.intent_id() {
            Some(k) => maps_dir.join(contact_map_file(k)),
            None if available.len() == 1 => available[0].clone(),
            None => {
                return Err(Error::InvalidConfig(format!(
                    "{}: log has no intent_id and {} holds {} contact maps",
                    log.name,
                    maps_dir.display(),
                    available.len()
                )))
            }
        };
        let map = read_contact_map(&path)?;
        let slot = match maps.iter().position(|m| m.intent_id == map.intent_id) {
            Some(i) => i,
            None => {
                maps.push(map);
                maps.len() - 1
            }
        };
        index.push(slot);
    }
    let refs: Vec<&ContactMap> = index.iter().map(|&i| &maps[i]).collect();
    let mesh = mesh.map(read_obj).transpose()?;
    evaluate(&logs, &refs, mesh.as_ref(), criteria)
}
