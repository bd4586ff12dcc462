use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bundle::{view_files, BundleManifest, MANIFEST};
use crate::error::{Error, Result};
use crate::geometry::io::{format_obj, write_pfm, CameraDocument};
use crate::geometry::{back_project, pixel_center, render_depth, shapes, Camera, CameraIntrinsics, CameraPose, CameraView, TriangleMesh, Vec3};
use crate::ingest::{write_pgm, write_proposals, BBox, IntentProposal, MaskImage, ProposalSet, Scene, ViewEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SynthShape {
    Sphere,
    Cube,
    Torus,
    Dumbbell,
}

impl SynthShape {
    pub fn name(self) -> &'static str {
        match self {
            SynthShape::Sphere => "sphere",
            SynthShape::Cube => "cube",
            SynthShape::Torus => "torus",
            SynthShape::Dumbbell => "dumbbell",
        }
    }

    /// Desk-scale test object centered at the origin.
    pub fn mesh(self) -> TriangleMesh {
        match self {
            SynthShape::Sphere => shapes::icosphere(0.05, 3),
            SynthShape::Cube => shapes::cube(0.08, 4),
            SynthShape::Torus => shapes::torus(0.05, 0.018, 48, 24),
            SynthShape::Dumbbell => shapes::dumbbell(0.03, 24, 32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub shape: SynthShape,
    /// Image width and height in pixels.
    pub resolution: usize,
    pub seed: u64,
    /// 1 or 2. Intent 0 is the whole silhouette; intent 1 the part with world x < 0.
    pub intents: usize,
    /// Base detector confidence per intent, jittered by up to ±0.05 per view.
    pub confidences: Vec<f64>,
    pub camera_distance: f64,
    /// Camera height above the equator, radians.
    pub elevation: f64,
    /// Horizontal field of view, radians.
    pub fov: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            shape: SynthShape::Sphere,
            resolution: 64,
            seed: 0,
            intents: 2,
            confidences: vec![0.9, 0.8],
            camera_distance: 0.35,
            elevation: 30f64.to_radians(),
            fov: 40f64.to_radians(),
        }
    }
}

const INTENT_NAMES: [(&str, &str); 2] = [
    ("body", "the whole object"),
    ("left_half", "the half of the object on the negative x side"),
];

/// Four cameras at 90° spacing around +Z, all looking at the origin.
pub fn ring_cameras(opts: &SynthOptions) -> Result<Vec<Camera>> {
    let intrinsics = CameraIntrinsics::from_fov(opts.resolution, opts.resolution, opts.fov)?;
    (0..4)
        .map(|i| {
            let azimuth = i as f64 * std::f64::consts::FRAC_PI_2;
            let (ce, se) = (opts.elevation.cos(), opts.elevation.sin());
            let eye = Vec3::new(ce * azimuth.cos(), ce * azimuth.sin(), se) * opts.camera_distance;
            let pose = CameraPose::look_at(eye, Vec3::zeros(), Vec3::z())?;
            Camera::new(intrinsics, pose)
        })
        .collect()
}

/// Tight box around the mask's pixels, on pixel edges.
fn mask_bbox(mask: &MaskImage) -> Option<BBox> {
    let mut lo = (usize::MAX, usize::MAX);
    let mut hi = (0, 0);
    for row in 0..mask.height() {
        for col in 0..mask.width() {
            if mask.get(col, row) {
                lo = (lo.0.min(col), lo.1.min(row));
                hi = (hi.0.max(col), hi.1.max(row));
            }
        }
    }
    (lo.0 != usize::MAX).then(|| BBox::new(lo.0 as f64, lo.1 as f64, hi.0 as f64 + 1.0, hi.1 as f64 + 1.0))
}

fn intent_mask(view: &CameraView, intent: usize) -> Result<MaskImage> {
    let depth = view.depth()?;
    let mut mask = MaskImage::from_depth(depth);
    if intent == 1 {
        for row in 0..depth.height() {
            for col in 0..depth.width() {
                if let Some(d) = depth.get(col, row) {
                    let p = back_project(&view.camera, &pixel_center(col, row), d)?;
                    mask.set(col, row, p.x < 0.0);
                }
            }
        }
    }
    Ok(mask)
}

/// Renders a complete synthetic scene: mesh, four depth views, silhouette
/// masks, and a proposal document whose boxes bound the masks.
pub fn synth_scene(opts: &SynthOptions) -> Result<Scene> {
    if !(1..=INTENT_NAMES.len()).contains(&opts.intents) {
        return Err(Error::InvalidConfig(format!("synthetic scenes have 1 or 2 intents, got {}", opts.intents)));
    }
    if opts.confidences.len() < opts.intents {
        return Err(Error::InvalidConfig(format!(
            "{} confidences for {} intents",
            opts.confidences.len(),
            opts.intents
        )));
    }
    if opts.resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be positive".into()));
    }
    let mesh = opts.shape.mesh();
    let views = ring_cameras(opts)?
        .into_iter()
        .enumerate()
        .map(|(i, cam)| {
            let depth = render_depth(&mesh, &cam);
            CameraView::new(i, cam, Some(depth))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut masks = BTreeMap::new();
    let mut intents = Vec::new();
    for k in 0..opts.intents {
        let mut entries = Vec::new();
        for view in &views {
            let mask = intent_mask(view, k)?;
            let jitter: f64 = rng.gen_range(-0.05..=0.05);
            let Some(bbox) = mask_bbox(&mask) else {
                continue;
            };
            entries.push(ViewEntry {
                view_id: view.view_id,
                visible: true,
                bbox,
                confidence: (opts.confidences[k] + jitter).clamp(0.0, 1.0),
            });
            masks.insert((view.view_id, k), mask);
        }
        intents.push(IntentProposal {
            intent_id: k,
            part_name: INTENT_NAMES[k].0.into(),
            description: INTENT_NAMES[k].1.into(),
            views: entries,
        });
    }
    let proposals = ProposalSet {
        object_id: opts.shape.name().into(),
        intents,
        warnings: Vec::new(),
    };
    Scene::new(mesh, views, proposals, masks)
}

/// Writes `scene` as a bundle under `dir`, creating it if needed.
pub fn write_bundle(dir: &Path, scene: &Scene) -> Result<BundleManifest> {
    let manifest = BundleManifest {
        mesh: "object.obj".into(),
        proposals: "proposals.json".into(),
        masks_dir: "masks".into(),
        views: scene.views.iter().map(view_files).collect(),
        config: None,
    };
    let masks_dir = dir.join(&manifest.masks_dir);
    fs::create_dir_all(&masks_dir).map_err(|e| Error::io(&masks_dir, e))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write(&manifest.mesh, format_obj(&scene.mesh))?;
    write_proposals(&dir.join(&manifest.proposals), &scene.proposals)?;
    for (view, files) in scene.views.iter().zip(&manifest.views) {
        let doc = CameraDocument::from_camera(view.view_id, &format!("view_{}", view.view_id), &view.camera);
        write(&files.camera, serde_json::to_string_pretty(&doc).expect("camera serializes") + "\n")?;
        write_pfm(&dir.join(&files.depth), view.depth()?)?;
    }
    for (&(v, k), mask) in &scene.masks {
        write_pgm(&manifest.mask_path(dir, v, k), mask)?;
    }
    write(MANIFEST, manifest.to_json())?;
    Ok(manifest)
}
