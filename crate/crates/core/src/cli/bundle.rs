use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::io::{read_camera, read_obj, read_pfm};
use crate::geometry::CameraView;
use crate::ingest::{mask_file_name, read_pgm, read_proposals, Scene};

/// Name of the manifest file at the root of every bundle.
pub const MANIFEST: &str = "bundle.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewFiles {
    pub view_id: usize,
    pub camera: String,
    pub depth: String,
}

/// Bundle manifest. Paths are relative to the bundle directory. Masks live
/// in `masks_dir` as `mask_<view>_<intent>.pgm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleManifest {
    pub mesh: String,
    pub proposals: String,
    #[serde(default = "default_masks_dir")]
    pub masks_dir: String,
    pub views: Vec<ViewFiles>,
    /// Optional pipeline config shipped with the scene.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
}

fn default_masks_dir() -> String {
    "masks".into()
}

impl BundleManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn mask_path(&self, dir: &Path, view_id: usize, intent_id: usize) -> PathBuf {
        dir.join(&self.masks_dir).join(mask_file_name(view_id, intent_id))
    }
}

/// Findings are problems that stop a run; warnings are not.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Loads everything the bundle references and checks it for consistency.
/// Returns the scene only when there are no findings.
pub fn inspect_bundle(dir: &Path) -> (Option<Scene>, ValidationReport) {
    let mut report = ValidationReport::default();
    let manifest = match BundleManifest::read(dir) {
        Ok(m) => m,
        Err(e) => {
            report.findings.push(e.to_string());
            return (None, report);
        }
    };
    let findings = &mut report.findings;

    let mesh = match read_obj(&dir.join(&manifest.mesh)) {
        Ok(m) if !m.is_watertight() => {
            findings.push(format!("{}: mesh is not watertight", manifest.mesh));
            None
        }
        Ok(m) => Some(m),
        Err(e) => {
            findings.push(e.to_string());
            None
        }
    };

    let proposals = match read_proposals(&dir.join(&manifest.proposals)) {
        Ok(p) => {
            report.warnings.extend(p.warnings.iter().cloned());
            Some(p)
        }
        Err(e) => {
            findings.push(e.to_string());
            None
        }
    };

    let mut views = Vec::new();
    let mut seen = BTreeSet::new();
    for vf in &manifest.views {
        if !seen.insert(vf.view_id) {
            findings.push(format!("view {} is listed twice", vf.view_id));
            continue;
        }
        let camera = read_camera(&dir.join(&vf.camera));
        let depth = read_pfm(&dir.join(&vf.depth));
        match (camera, depth) {
            (Ok(doc), Ok(depth)) => {
                if doc.view_id != vf.view_id {
                    findings.push(format!(
                        "{}: camera document says view {} but the manifest lists view {}",
                        vf.camera, doc.view_id, vf.view_id
                    ));
                    continue;
                }
                match doc.view(Some(depth)) {
                    Ok(v) => views.push(v),
                    Err(e) => findings.push(format!("view {}: {e}", vf.view_id)),
                }
            }
            (c, d) => {
                for e in [c.err(), d.err()].into_iter().flatten() {
                    findings.push(e.to_string());
                }
            }
        }
    }
    if manifest.views.is_empty() {
        findings.push("bundle lists no views".into());
    }

    let mut masks = BTreeMap::new();
    if let Some(p) = &proposals {
        for intent in &p.intents {
            for entry in &intent.views {
                if !seen.contains(&entry.view_id) {
                    findings.push(format!(
                        "intent {} refers to unknown view {}",
                        intent.intent_id, entry.view_id
                    ));
                }
            }
            for view in &views {
                if intent.visible_entry(view.view_id).is_none() {
                    continue;
                }
                let path = manifest.mask_path(dir, view.view_id, intent.intent_id);
                if !path.exists() {
                    findings.push(format!(
                        "missing mask for view {}, intent {} ({})",
                        view.view_id,
                        intent.intent_id,
                        path.display()
                    ));
                    continue;
                }
                match read_pgm(&path) {
                    Ok(mask) => {
                        let (w, h) = (view.camera.width(), view.camera.height());
                        if (mask.width(), mask.height()) != (w, h) {
                            findings.push(format!(
                                "{}: mask is {}x{} but view {} is {w}x{h}",
                                path.display(),
                                mask.width(),
                                mask.height(),
                                view.view_id
                            ));
                        } else {
                            masks.insert((view.view_id, intent.intent_id), mask);
                        }
                    }
                    Err(e) => findings.push(e.to_string()),
                }
            }
        }
    }

    if !findings.is_empty() {
        return (None, report);
    }
    let (Some(mesh), Some(proposals)) = (mesh, proposals) else {
        unreachable!("missing inputs always leave a finding");
    };
    match Scene::new(mesh, views, proposals, masks) {
        Ok(scene) => (Some(scene), report),
        Err(e) => {
            report.findings.push(e.to_string());
            (None, report)
        }
    }
}

/// Like [`inspect_bundle`] but fails with every finding.
pub fn load_bundle(dir: &Path) -> Result<Scene> {
    match inspect_bundle(dir) {
        (Some(scene), _) => Ok(scene),
        (None, report) => Err(Error::Bundle(report.findings)),
    }
}

/// File names a generated bundle uses for one view.
pub(crate) fn view_files(view: &CameraView) -> ViewFiles {
    ViewFiles {
        view_id: view.view_id,
        camera: format!("view_{}.json", view.view_id),
        depth: format!("depth_{}.pfm", view.view_id),
    }
}
