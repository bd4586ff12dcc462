//! On-disk formats: ASCII OBJ meshes (v/f records), little-endian PFM depth
//! maps, and the JSON camera sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::camera::{Camera, CameraIntrinsics, CameraPose, CameraView, DepthMap, Vec3};
use super::mesh::TriangleMesh;
use crate::error::{Error, Result};

/// Parses the `v`/`f` subset of Wavefront OBJ. Polygonal faces are fan
/// triangulated; `v/vt/vn` references and negative indices are accepted;
/// every other record is ignored.
pub fn parse_obj(text: &str, source_name: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let loc = || format!("line {}", lineno + 1);
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::parse(source_name, loc(), e.to_string()))?;
                if coords.len() != 3 {
                    return Err(Error::parse(source_name, loc(), "vertex needs 3 coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in tokens {
                    let first = tok.split('/').next().unwrap_or("");
                    let raw: i64 = first
                        .parse()
                        .map_err(|_| Error::parse(source_name, loc(), format!("bad face index {tok:?}")))?;
                    let resolved = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(Error::parse(
                            source_name,
                            loc(),
                            format!("face index {raw} out of range"),
                        ));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(Error::parse(source_name, loc(), "face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles)
}

pub fn read_obj(path: &Path) -> Result<TriangleMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, &path.display().to_string())
}

pub fn format_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::with_capacity(mesh.vertices().len() * 40);
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn write_obj(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    fs::write(path, format_obj(mesh)).map_err(|e| Error::io(path, e))
}

/// Encodes a depth map as a grayscale little-endian PFM. Background pixels
/// are written as 0.0. Rows are stored bottom-to-top as PFM requires.
pub fn encode_pfm(depth: &DepthMap) -> Vec<u8> {
    let (w, h) = (depth.width(), depth.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for row in (0..h).rev() {
        for col in 0..w {
            let v = depth.get(col, row).unwrap_or(0.0) as f32;
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Decodes a grayscale PFM. Zero, negative, and non-finite samples become
/// "no hit".
pub fn decode_pfm(bytes: &[u8], source_name: &str) -> Result<DepthMap> {
    let mut pos = 0usize;
    let mut header = Vec::with_capacity(4);
    while header.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse(source_name, "header", "truncated PFM header"));
        }
        header.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if header[0] != "Pf" {
        return Err(Error::parse(
            source_name,
            "header",
            format!("expected grayscale 'Pf' magic, found {:?}", header[0]),
        ));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(source_name, "header", format!("bad dimension {s:?}")))
    };
    let (w, h) = (parse_dim(&header[1])?, parse_dim(&header[2])?);
    let scale: f64 = header[3]
        .parse()
        .map_err(|_| Error::parse(source_name, "header", format!("bad scale {:?}", header[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::parse(source_name, "header", "scale must be non-zero"));
    }
    let little = scale < 0.0;
    let need = w * h * 4;
    let data = bytes.get(pos..pos + need).ok_or_else(|| {
        Error::parse(
            source_name,
            "raster",
            format!("expected {need} bytes of samples, found {}", bytes.len().saturating_sub(pos)),
        )
    })?;
    let mut values = vec![0.0; w * h];
    for (i, chunk) in data.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (file_row, col) = (i / w, i % w);
        values[(h - 1 - file_row) * w + col] = v as f64;
    }
    DepthMap::new(w, h, values)
}

pub fn read_pfm(path: &Path) -> Result<DepthMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes, &path.display().to_string())
}

pub fn write_pfm(path: &Path, depth: &DepthMap) -> Result<()> {
    fs::write(path, encode_pfm(depth)).map_err(|e| Error::io(path, e))
}

/// JSON sidecar describing one viewpoint. `rotation` is row-major and maps
/// world to camera coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraDocument {
    pub view_id: usize,
    #[serde(default)]
    pub name: String,
    pub intrinsics: CameraIntrinsics,
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl CameraDocument {
    pub fn from_camera(view_id: usize, name: &str, camera: &Camera) -> Self {
        let r = camera.pose.rotation;
        let t = camera.pose.translation;
        Self {
            view_id,
            name: name.to_string(),
            intrinsics: camera.intrinsics,
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [t.x, t.y, t.z],
        }
    }

    pub fn camera(&self) -> Result<Camera> {
        let r = &self.rotation;
        let rotation = Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        );
        let pose = CameraPose::new(rotation, Vec3::from(self.translation))?;
        Camera::new(self.intrinsics, pose)
    }

    pub fn view(&self, depth: Option<DepthMap>) -> Result<CameraView> {
        CameraView::new(self.view_id, self.camera()?, depth)
    }
}

pub fn read_camera(path: &Path) -> Result<CameraDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn obj_roundtrip_preserves_mesh() {
        let cube = shapes::cube(0.3, 2);
        let back = parse_obj(&format_obj(&cube), "mem").unwrap();
        assert_eq!(back.vertices(), cube.vertices());
        assert_eq!(back.triangles(), cube.triangles());
        assert!(back.is_watertight());
    }

    #[test]
    fn obj_accepts_slashes_quads_and_negative_indices() {
        let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -4 -3 -2\n";
        let m = parse_obj(text, "mem").unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3], [0, 1, 2]]);
    }

    #[test]
    fn obj_reports_location() {
        let err = parse_obj("v 0 0 0\nf 1 2 3\n", "bad.obj").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert_eq!(location, "line 2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pfm_roundtrip_keeps_background() {
        let d = DepthMap::new(3, 2, vec![0.5, f64::NAN, 1.25, 2.0, 0.75, 0.0]).unwrap();
        let back = decode_pfm(&encode_pfm(&d), "mem").unwrap();
        assert_eq!(back, d);
        assert!(decode_pfm(b"PF\n1 1\n-1.0\n\0\0\0\0", "mem").is_err());
        assert!(decode_pfm(b"Pf\n2 2\n-1.0\n\0\0\0\0", "mem").is_err());
    }

    #[test]
    fn camera_document_roundtrip() {
        let cam = Camera::new(
            CameraIntrinsics::from_fov(32, 24, 0.8).unwrap(),
            CameraPose::look_at(Vec3::new(0.3, -0.2, 0.1), Vec3::zeros(), Vec3::z()).unwrap(),
        )
        .unwrap();
        let doc = CameraDocument::from_camera(2, "left", &cam);
        let json = serde_json::to_string(&doc).unwrap();
        let back: CameraDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.camera().unwrap(), cam);
    }
}
