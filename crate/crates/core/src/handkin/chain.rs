use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use nalgebra::{Isometry3, Rotation3, Translation3, Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginDoc {
    #[serde(default)]
    pub xyz: [f64; 3],
    /// Fixed-axis roll, pitch, yaw in radians.
    #[serde(default)]
    pub rpy: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    #[default]
    Revolute,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub name: String,
    pub parent: String,
    pub child: String,
    #[serde(default)]
    pub origin: OriginDoc,
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
    #[serde(default, rename = "type")]
    pub kind: JointKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<[f64; 2]>,
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingertipDoc {
    pub finger: String,
    pub frame: String,
    #[serde(default)]
    pub offset: [f64; 3],
    #[serde(default)]
    pub thumb: bool,
}

/// On-disk hand description. The wrist is the single root link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDocument {
    pub name: String,
    pub joints: Vec<JointDoc>,
    pub fingertips: Vec<FingertipDoc>,
    /// Palm direction in the wrist frame.
    #[serde(default = "default_palm")]
    pub palm_normal: [f64; 3],
}

fn default_palm() -> [f64; 3] {
    [0.0, 0.0, -1.0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: String,
    pub child: String,
    pub origin: Isometry3<f64>,
    pub axis: Unit<Vec3>,
    pub kind: JointKind,
    pub limits: [f64; 2],
    /// Position in the joint vector θ, for revolute joints.
    pub dof: Option<usize>,
    /// Joint whose child link is this joint's parent; `None` at the wrist.
    pub parent_joint: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fingertip {
    pub finger: String,
    pub frame: String,
    pub offset: Vec3,
    pub thumb: bool,
    /// Joint whose child link is the tip frame; `None` when attached to the wrist.
    pub frame_joint: Option<usize>,
    /// Joints from the wrist out to the tip frame.
    pub path: Vec<usize>,
}

/// A tree of revolute (and fixed) joints hanging off a free-floating wrist.
/// Joints are stored parent-before-child; θ follows the declaration order of
/// the revolute joints in the source document.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain {
    pub name: String,
    pub root: String,
    pub joints: Vec<Joint>,
    pub fingertips: Vec<Fingertip>,
    pub palm_normal: Vec3,
    dof_joint: Vec<usize>,
    document: ChainDocument,
}

impl KinematicChain {
    pub fn from_document(doc: ChainDocument) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidChain(msg));
        if doc.fingertips.is_empty() {
            return bad("chain declares no fingertips".into());
        }
        let mut names = BTreeSet::new();
        let mut child_of = BTreeMap::new();
        for (i, j) in doc.joints.iter().enumerate() {
            if !names.insert(j.name.as_str()) {
                return bad(format!("duplicate joint name {:?}", j.name));
            }
            if child_of.insert(j.child.as_str(), i).is_some() {
                return bad(format!("link {:?} has more than one parent joint", j.child));
            }
            if j.parent == j.child {
                return bad(format!("joint {:?} connects a link to itself", j.name));
            }
        }
        let roots: BTreeSet<&str> = doc
            .joints
            .iter()
            .map(|j| j.parent.as_str())
            .filter(|p| !child_of.contains_key(p))
            .collect();
        let root = match (roots.len(), doc.joints.is_empty()) {
            (1, _) => roots.into_iter().next().unwrap().to_string(),
            (0, true) => doc.fingertips[0].frame.clone(),
            (0, false) => return bad("joint graph has a cycle".into()),
            _ => return bad(format!("chain has several root links: {roots:?}")),
        };

        // parent-before-child order
        let mut order = Vec::with_capacity(doc.joints.len());
        let mut placed = vec![false; doc.joints.len()];
        let mut frontier: Vec<&str> = vec![root.as_str()];
        while let Some(link) = frontier.pop() {
            for (i, j) in doc.joints.iter().enumerate().rev() {
                if !placed[i] && j.parent == link {
                    placed[i] = true;
                    order.push(i);
                    frontier.push(j.child.as_str());
                }
            }
        }
        if order.len() != doc.joints.len() {
            return bad("joint graph has a cycle or a disconnected branch".into());
        }
        let mut dof_of = vec![None; doc.joints.len()];
        let mut dof_joint_decl = Vec::new();
        for (i, j) in doc.joints.iter().enumerate() {
            if j.kind == JointKind::Revolute {
                dof_of[i] = Some(dof_joint_decl.len());
                dof_joint_decl.push(i);
            }
        }
        let mut position = vec![0usize; doc.joints.len()];
        for (pos, &i) in order.iter().enumerate() {
            position[i] = pos;
        }
        let mut joints = Vec::with_capacity(order.len());
        for &i in &order {
            let j = &doc.joints[i];
            let axis = Vec3::from(j.axis);
            if !(axis.norm() > 1e-12) || !axis.iter().all(|v| v.is_finite()) {
                return bad(format!("joint {:?} has a zero axis", j.name));
            }
            let limits = match (j.kind, j.limits) {
                (JointKind::Fixed, _) => [0.0, 0.0],
                (JointKind::Revolute, Some([lo, hi])) if lo <= hi && lo.is_finite() && hi.is_finite() => [lo, hi],
                (JointKind::Revolute, Some(l)) => {
                    return bad(format!("joint {:?} has invalid limits {l:?}", j.name))
                }
                (JointKind::Revolute, None) => return bad(format!("joint {:?} has no limits", j.name)),
            };
            joints.push(Joint {
                name: j.name.clone(),
                parent: j.parent.clone(),
                child: j.child.clone(),
                origin: origin_isometry(&j.origin),
                axis: Unit::new_normalize(axis),
                kind: j.kind,
                limits,
                dof: dof_of[i],
                parent_joint: child_of.get(j.parent.as_str()).map(|&p| position[p]),
            });
        }
        let dof_joint = dof_joint_decl.iter().map(|&i| position[i]).collect();

        let mut fingers = BTreeSet::new();
        let mut fingertips = Vec::new();
        for ft in &doc.fingertips {
            if !fingers.insert(ft.finger.as_str()) {
                return bad(format!("finger {:?} declared twice", ft.finger));
            }
            let frame_joint = if ft.frame == root {
                None
            } else {
                match child_of.get(ft.frame.as_str()) {
                    Some(&i) => Some(position[i]),
                    None => return bad(format!("fingertip frame {:?} is not a link", ft.frame)),
                }
            };
            let mut path = Vec::new();
            let mut cur = frame_joint;
            while let Some(k) = cur {
                path.push(k);
                cur = joints[k].parent_joint;
            }
            path.reverse();
            fingertips.push(Fingertip {
                finger: ft.finger.clone(),
                frame: ft.frame.clone(),
                offset: Vec3::from(ft.offset),
                thumb: ft.thumb,
                frame_joint,
                path,
            });
        }
        let thumbs = fingertips.iter().filter(|f| f.thumb).count();
        if thumbs > 1 {
            return bad(format!("{thumbs} fingers are marked as thumb"));
        }
        if fingertips.len() > 1 && thumbs == 0 {
            return bad("a multi-finger chain must mark one thumb".into());
        }
        let palm = Vec3::from(doc.palm_normal);
        if !(palm.norm() > 1e-12) {
            return bad("palm_normal must be non-zero".into());
        }
        Ok(Self {
            name: doc.name.clone(),
            root,
            joints,
            fingertips,
            palm_normal: palm.normalize(),
            dof_joint,
            document: doc,
        })
    }

    pub fn document(&self) -> &ChainDocument {
        &self.document
    }

    /// Number of actuated joints, d_θ.
    pub fn dof(&self) -> usize {
        self.dof_joint.len()
    }

    pub fn finger_count(&self) -> usize {
        self.fingertips.len()
    }

    pub fn thumb_index(&self) -> Option<usize> {
        self.fingertips.iter().position(|f| f.thumb)
    }

    /// Joint (in stored order) driving each entry of θ.
    pub fn dof_joint(&self, dof: usize) -> &Joint {
        &self.joints[self.dof_joint[dof]]
    }

    pub fn limits(&self) -> Vec<[f64; 2]> {
        (0..self.dof()).map(|d| self.dof_joint(d).limits).collect()
    }

    pub fn mid_range(&self) -> Vec<f64> {
        self.limits().iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect()
    }
}

pub(crate) fn origin_isometry(o: &OriginDoc) -> Isometry3<f64> {
    let r = Rotation3::from_euler_angles(o.rpy[0], o.rpy[1], o.rpy[2]);
    Isometry3::from_parts(
        Translation3::new(o.xyz[0], o.xyz[1], o.xyz[2]),
        UnitQuaternion::from_rotation_matrix(&r),
    )
}

pub fn parse_chain(text: &str, source_name: &str) -> Result<KinematicChain> {
    let doc: ChainDocument = serde_json::from_str(text).map_err(|e| Error::json(source_name, e))?;
    KinematicChain::from_document(doc)
}

pub fn read_chain(path: &Path) -> Result<KinematicChain> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_chain(&text, &path.display().to_string())
}

/// Resolves `builtin:<name>` or a path to a chain document.
pub fn load_chain(source: &str) -> Result<KinematicChain> {
    match source.strip_prefix("builtin:") {
        Some(name) => builtin_chain(name),
        None => read_chain(Path::new(source)),
    }
}

pub fn builtin_chain(name: &str) -> Result<KinematicChain> {
    let doc = match name {
        "shadow" => shadow_like(),
        "allegro" => allegro_like(),
        "planar" => planar_finger(),
        other => {
            return Err(Error::InvalidChain(format!(
                "unknown built-in chain {other:?} (expected shadow, allegro, or planar)"
            )))
        }
    };
    KinematicChain::from_document(doc)
}

fn revolute(name: &str, parent: &str, child: &str, xyz: [f64; 3], rpy: [f64; 3], axis: [f64; 3], lo: f64, hi: f64) -> JointDoc {
    JointDoc {
        name: name.into(),
        parent: parent.into(),
        child: child.into(),
        origin: OriginDoc { xyz, rpy },
        axis,
        kind: JointKind::Revolute,
        limits: Some([lo, hi]),
    }
}

const ABDUCT: [f64; 3] = [0.0, 0.0, 1.0];
const FLEX: [f64; 3] = [0.0, 1.0, 0.0];

/// Abduction then three flexion joints, fingers pointing along wrist +x and
/// curling toward the palm (wrist −z).
fn digit(
    joints: &mut Vec<JointDoc>,
    tips: &mut Vec<FingertipDoc>,
    finger: &str,
    base: [f64; 3],
    rpy: [f64; 3],
    lengths: [f64; 3],
    limits: [[f64; 2]; 4],
    thumb: bool,
) {
    let link = |k: usize| format!("{finger}_link{k}");
    joints.push(revolute(&format!("{finger}_j0"), "wrist", &link(0), base, rpy, ABDUCT, limits[0][0], limits[0][1]));
    joints.push(revolute(&format!("{finger}_j1"), &link(0), &link(1), [0.0; 3], [0.0; 3], FLEX, limits[1][0], limits[1][1]));
    joints.push(revolute(&format!("{finger}_j2"), &link(1), &link(2), [lengths[0], 0.0, 0.0], [0.0; 3], FLEX, limits[2][0], limits[2][1]));
    joints.push(revolute(&format!("{finger}_j3"), &link(2), &link(3), [lengths[1], 0.0, 0.0], [0.0; 3], FLEX, limits[3][0], limits[3][1]));
    tips.push(FingertipDoc {
        finger: finger.into(),
        frame: link(3),
        offset: [lengths[2], 0.0, 0.0],
        thumb,
    });
}

/// Five digits with four actuated joints each (20 DoF).
fn shadow_like() -> ChainDocument {
    let (mut joints, mut tips) = (Vec::new(), Vec::new());
    let finger_limits = [[-0.349, 0.349], [-0.262, 1.571], [0.0, 1.571], [0.0, 1.571]];
    for (name, y) in [("index", 0.033), ("middle", 0.011), ("ring", -0.011), ("little", -0.033)] {
        digit(&mut joints, &mut tips, name, [0.095, y, 0.0], [0.0; 3], [0.045, 0.025, 0.026], finger_limits, false);
    }
    digit(
        &mut joints,
        &mut tips,
        "thumb",
        [0.034, 0.029, -0.01],
        [-0.9, 0.0, 0.7],
        [0.038, 0.032, 0.0275],
        [[-1.047, 1.047], [0.0, 1.222], [-0.209, 0.209], [-0.262, 1.571]],
        true,
    );
    ChainDocument {
        name: "shadow_like".into(),
        joints,
        fingertips: tips,
        palm_normal: default_palm(),
    }
}

/// Four digits with four actuated joints each (16 DoF).
fn allegro_like() -> ChainDocument {
    let (mut joints, mut tips) = (Vec::new(), Vec::new());
    let finger_limits = [[-0.47, 0.47], [-0.196, 1.61], [-0.174, 1.709], [-0.227, 1.618]];
    for (name, y) in [("index", 0.0435), ("middle", 0.0), ("ring", -0.0435)] {
        digit(&mut joints, &mut tips, name, [0.095, y, 0.0], [0.0; 3], [0.054, 0.0384, 0.0267], finger_limits, false);
    }
    digit(
        &mut joints,
        &mut tips,
        "thumb",
        [-0.018, 0.04, -0.035],
        [-1.2, 0.0, 1.0],
        [0.0554, 0.0514, 0.0423],
        [[0.263, 1.396], [-0.105, 1.163], [-0.189, 1.644], [-0.162, 1.719]],
        true,
    );
    ChainDocument {
        name: "allegro_like".into(),
        joints,
        fingertips: tips,
        palm_normal: default_palm(),
    }
}

/// Single two-link finger in the wrist x-y plane, both joints about z.
/// Links are 0.04 m and 0.03 m long; the tip sits at (0.07, 0, 0) when
/// straight.
fn planar_finger() -> ChainDocument {
    let pi = std::f64::consts::PI;
    ChainDocument {
        name: "planar_two_link".into(),
        joints: vec![
            revolute("joint1", "wrist", "link1", [0.0; 3], [0.0; 3], ABDUCT, -pi, pi),
            revolute("joint2", "link1", "link2", [0.04, 0.0, 0.0], [0.0; 3], ABDUCT, -pi, pi),
        ],
        fingertips: vec![FingertipDoc {
            finger: "tip".into(),
            frame: "link2".into(),
            offset: [0.03, 0.0, 0.0],
            thumb: false,
        }],
        palm_normal: default_palm(),
    }
}
