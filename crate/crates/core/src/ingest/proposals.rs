use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel rectangle `[x_min, y_min, x_max, y_max]` in continuous image
/// coordinates (top-left origin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    /// Finite corners and strictly positive width and height.
    pub fn is_valid(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min
    }

    /// Half-open pixel index ranges whose centers fall inside the box. Not
    /// clipped to any image.
    pub fn pixel_ranges(&self) -> (std::ops::Range<i64>, std::ops::Range<i64>) {
        let span = |lo: f64, hi: f64| {
            let a = (lo - 0.5).ceil() as i64;
            let b = (hi - 0.5).ceil() as i64;
            a..b.max(a)
        };
        (span(self.x_min, self.x_max), span(self.y_min, self.y_max))
    }

    /// Number of pixel centers covered.
    pub fn pixel_area(&self) -> usize {
        let (cols, rows) = self.pixel_ranges();
        (cols.end - cols.start) as usize * (rows.end - rows.start) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub view_id: usize,
    pub visible: bool,
    pub bbox: BBox,
    pub confidence: f64,
}

/// One graspable part proposed for the object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentProposal {
    pub intent_id: usize,
    pub part_name: String,
    #[serde(default)]
    pub description: String,
    pub views: Vec<ViewEntry>,
}

impl IntentProposal {
    pub fn entry(&self, view_id: usize) -> Option<&ViewEntry> {
        self.views.iter().find(|e| e.view_id == view_id)
    }

    /// The entry for `view_id` when it is marked visible.
    pub fn visible_entry(&self, view_id: usize) -> Option<&ViewEntry> {
        self.entry(view_id).filter(|e| e.visible)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalSet {
    pub object_id: String,
    pub intents: Vec<IntentProposal>,
    /// Non-fatal findings from loading (dropped entries, unusual counts).
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl ProposalSet {
    pub fn intent(&self, intent_id: usize) -> Option<&IntentProposal> {
        self.intents.iter().find(|i| i.intent_id == intent_id)
    }

    pub fn intent_ids(&self) -> Vec<usize> {
        self.intents.iter().map(|i| i.intent_id).collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    object_id: String,
    intents: Vec<RawIntent>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntent {
    intent_id: usize,
    part_name: String,
    #[serde(default)]
    description: String,
    views: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    view_id: usize,
    #[serde(default)]
    visible: Option<bool>,
    #[serde(default)]
    bbox: Option<Vec<f64>>,
    confidence: f64,
}

pub const MIN_INTENTS: usize = 2;
pub const MAX_INTENTS: usize = 4;

/// Parses a proposal document. Entries without a usable bounding box are
/// dropped, confidences are clipped to [0, 1], and a missing `visible` flag
/// is taken from whether the box is usable. Intents left with no entries are
/// dropped.
pub fn load_proposals(text: &str, source_name: &str) -> Result<ProposalSet> {
    let raw: RawDocument =
        serde_json::from_str(text).map_err(|e| Error::json(source_name, e))?;
    let mut warnings = Vec::new();
    let mut intents = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, ri) in raw.intents.into_iter().enumerate() {
        if !seen.insert(ri.intent_id) {
            return Err(Error::parse(
                source_name,
                format!("intents[{i}]"),
                format!("duplicate intent_id {}", ri.intent_id),
            ));
        }
        let mut views = Vec::new();
        let mut view_ids = BTreeSet::new();
        for (j, re) in ri.views.into_iter().enumerate() {
            if !view_ids.insert(re.view_id) {
                return Err(Error::parse(
                    source_name,
                    format!("intents[{i}].views[{j}]"),
                    format!("duplicate view_id {}", re.view_id),
                ));
            }
            let bbox = match re.bbox.as_deref() {
                Some([a, b, c, d]) => Some(BBox::new(*a, *b, *c, *d)).filter(|b| b.is_valid()),
                _ => None,
            };
            let Some(bbox) = bbox else {
                warnings.push(format!(
                    "intent {} view {}: dropped entry without a valid bounding box",
                    ri.intent_id, re.view_id
                ));
                continue;
            };
            if !re.confidence.is_finite() {
                return Err(Error::parse(
                    source_name,
                    format!("intents[{i}].views[{j}].confidence"),
                    "confidence must be finite",
                ));
            }
            views.push(ViewEntry {
                view_id: re.view_id,
                visible: re.visible.unwrap_or(true),
                bbox,
                confidence: re.confidence.clamp(0.0, 1.0),
            });
        }
        if views.is_empty() {
            warnings.push(format!("intent {}: no usable views, dropped", ri.intent_id));
            continue;
        }
        intents.push(IntentProposal {
            intent_id: ri.intent_id,
            part_name: ri.part_name,
            description: ri.description,
            views,
        });
    }
    if intents.is_empty() {
        return Err(Error::EmptyProposal);
    }
    if !(MIN_INTENTS..=MAX_INTENTS).contains(&intents.len()) {
        warnings.push(format!(
            "{} intents survived; expected between {MIN_INTENTS} and {MAX_INTENTS}",
            intents.len()
        ));
    }
    Ok(ProposalSet {
        object_id: raw.object_id,
        intents,
        warnings,
    })
}

pub fn read_proposals(path: &Path) -> Result<ProposalSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_proposals(&text, &path.display().to_string())
}

pub fn write_proposals(path: &Path, set: &ProposalSet) -> Result<()> {
    let text = serde_json::to_string_pretty(set).expect("proposal set serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
