//! Portable float map (PFM) reading and writing.
//!
//! Scanlines are stored bottom-to-top. A negative scale marks a little-endian
//! payload; the writer always emits little-endian single-channel files with
//! scale `-1.0`. Invalid pixels travel as NaN.

use std::path::Path;

use super::Map;
use crate::error::{Error, LoadError, Result};

/// Sample types that can be stored in a PFM payload.
pub trait PfmSample: Copy {
    fn to_f32(self) -> f32;
    fn is_finite_sample(self) -> bool;
}

impl PfmSample for f32 {
    fn to_f32(self) -> f32 {
        self
    }
    fn is_finite_sample(self) -> bool {
        self.is_finite()
    }
}

impl PfmSample for f64 {
    fn to_f32(self) -> f32 {
        self as f32
    }
    fn is_finite_sample(self) -> bool {
        self.is_finite()
    }
}

pub(super) fn decode(bytes: &[u8], path: &Path) -> Result<Map<f32>, LoadError> {
    let malformed = |reason: String| LoadError::MalformedHeader {
        path: path.to_path_buf(),
        reason,
    };
    let channels = match bytes.get(..2) {
        Some(b"Pf") => 1,
        Some(b"PF") => 3,
        _ => {
            return Err(LoadError::UnsupportedFormat {
                path: path.to_path_buf(),
                magic: String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned(),
            })
        }
    };
    let mut pos = 2;
    let mut token = || -> Option<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let width: usize = token()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed("missing or invalid width".into()))?;
    let height: usize = token()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed("missing or invalid height".into()))?;
    let scale: f32 = token()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed("missing or invalid scale".into()))?;
    if width == 0 || height == 0 {
        return Err(malformed(format!("zero dimension {width}x{height}")));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(malformed(format!("scale must be finite and non-zero, got {scale}")));
    }
    let little = scale < 0.0;
    // one whitespace byte separates the header from the payload
    let start = pos + 1;
    let n = width * height * channels;
    let need = n * 4;
    let payload = bytes.get(start..).unwrap_or(&[]);
    if payload.len() < need {
        return Err(LoadError::TruncatedPayload {
            path: path.to_path_buf(),
            expected: need,
            found: payload.len(),
        });
    }
    let raw: Vec<f32> = payload[..need]
        .chunks_exact(4)
        .map(|b| {
            let b = [b[0], b[1], b[2], b[3]];
            if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();

    let mut values = vec![0.0f32; width * height];
    let mut valid = vec![false; width * height];
    for file_row in 0..height {
        let y = height - 1 - file_row;
        for x in 0..width {
            let src = (file_row * width + x) * channels;
            let v = if channels == 1 {
                raw[src]
            } else {
                0.299 * raw[src] + 0.587 * raw[src + 1] + 0.114 * raw[src + 2]
            };
            let i = y * width + x;
            if v.is_finite() {
                values[i] = v;
                valid[i] = true;
            } else {
                values[i] = f32::NAN;
            }
        }
    }
    Ok(Map::from_parts(width, height, values, valid).expect("dimensions checked above"))
}

/// Reads a PFM file; non-finite samples become invalid pixels.
pub fn read_pfm(path: impl AsRef<Path>) -> Result<Map<f32>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(decode(&bytes, path)?)
}

/// Loads a real-valued map (disparity, depth, weights) saved by [`save_map`].
pub fn load_map(path: impl AsRef<Path>) -> Result<Map<f32>> {
    read_pfm(path)
}

/// Encodes `map` as a little-endian single-channel PFM.
pub fn write_pfm<T: PfmSample>(map: &Map<T>, out: &mut Vec<u8>) -> Result<()> {
    if let Some((x, y, _)) = map.iter_valid().find(|&(_, _, v)| !v.is_finite_sample()) {
        return Err(Error::Precondition(format!(
            "non-finite value at valid pixel ({x}, {y})"
        )));
    }
    let (w, h) = (map.width(), map.height());
    out.extend_from_slice(format!("Pf\n{w} {h}\n-1.0\n").as_bytes());
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            let v = map.get(x, y).map_or(f32::NAN, PfmSample::to_f32);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(())
}

/// Saves a real-valued map as PFM. Invalid pixels are written as NaN.
pub fn save_map<T: PfmSample>(map: &Map<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_pfm(map, &mut buf)?;
    std::fs::write(path, buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
