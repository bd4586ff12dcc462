use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::DepthMap;

/// Binary per-pixel membership, row-major with a top-left origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl MaskImage {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "mask data has {} pixels, expected {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Silhouette of the valid pixels of a depth map.
    pub fn from_depth(depth: &DepthMap) -> Self {
        Self::from_fn(depth.width(), depth.height(), |c, r| depth.is_valid(c, r))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        col < self.width && row < self.height && self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.data[row * self.width + col] = value;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &MaskImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }
}

/// Keeps only mask pixels that carry a valid depth sample.
pub fn filter_mask(mask: &MaskImage, depth: &DepthMap) -> Result<MaskImage> {
    if mask.width != depth.width() || mask.height != depth.height() {
        return Err(Error::Shape(format!(
            "mask is {}x{} but depth map is {}x{}",
            mask.width,
            mask.height,
            depth.width(),
            depth.height()
        )));
    }
    Ok(MaskImage::from_fn(mask.width, mask.height, |c, r| {
        mask.get(c, r) && depth.is_valid(c, r)
    }))
}

pub fn mask_file_name(view_id: usize, intent_id: usize) -> String {
    format!("mask_{view_id}_{intent_id}.pgm")
}

/// Binary PGM (P5, maxval 255): members are written as 255.
pub fn encode_pgm(mask: &MaskImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
    out.extend(mask.data.iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Reads a binary PGM; samples at or above half of maxval are members.
pub fn decode_pgm(bytes: &[u8], source_name: &str) -> Result<MaskImage> {
    let mut pos = 0usize;
    let mut header = Vec::with_capacity(4);
    while header.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse(source_name, "header", "truncated PGM header"));
        }
        header.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if header[0] != "P5" {
        return Err(Error::parse(
            source_name,
            "header",
            format!("expected binary 'P5' magic, found {:?}", header[0]),
        ));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(source_name, "header", format!("bad number {s:?}")))
    };
    let (w, h, maxval) = (num(&header[1])?, num(&header[2])?, num(&header[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(
            source_name,
            "header",
            format!("maxval {maxval} unsupported (1..=255)"),
        ));
    }
    let raster = bytes.get(pos..pos + w * h).ok_or_else(|| {
        Error::parse(
            source_name,
            "raster",
            format!("expected {} bytes, found {}", w * h, bytes.len().saturating_sub(pos)),
        )
    })?;
    let threshold = maxval.div_ceil(2);
    let data = raster.iter().map(|&v| v as usize >= threshold).collect();
    MaskImage::new(w, h, data)
}

pub fn read_pgm(path: &Path) -> Result<MaskImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, &path.display().to_string())
}

pub fn write_pgm(path: &Path, mask: &MaskImage) -> Result<()> {
    fs::write(path, encode_pgm(mask)).map_err(|e| Error::io(path, e))
}
