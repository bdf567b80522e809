//! Netpbm graymap/pixmap decoding (P2, P3, P5, P6) and 8-bit preview output.

use std::path::Path;

use super::{Image, Map};
use crate::error::{Error, LoadError, Result};

const LUMA: [f32; 3] = [0.299, 0.587, 0.114];

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first payload byte.
    payload: usize,
}

/// Reads whitespace-separated header tokens, skipping `#` comments.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next_token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn next_uint(&mut self) -> Option<u32> {
        std::str::from_utf8(self.next_token()?).ok()?.parse().ok()
    }
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header, LoadError> {
    let malformed = |reason: &str| LoadError::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut tok = Tokens { bytes, pos: 2 };
    let magic = [bytes[0], bytes[1]];
    let width = tok.next_uint().ok_or_else(|| malformed("missing or invalid width"))? as usize;
    let height = tok.next_uint().ok_or_else(|| malformed("missing or invalid height"))? as usize;
    let maxval = tok.next_uint().ok_or_else(|| malformed("missing or invalid maxval"))?;
    if width == 0 || height == 0 {
        return Err(malformed("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(malformed("maxval must be in 1..=65535"));
    }
    // Binary payload begins after exactly one whitespace byte.
    if tok.pos >= bytes.len() || !bytes[tok.pos].is_ascii_whitespace() {
        if matches!(&magic, b"P5" | b"P6") {
            return Err(LoadError::TruncatedPayload {
                path: path.to_path_buf(),
                expected: 1,
                found: 0,
            });
        }
    }
    Ok(Header {
        magic,
        width,
        height,
        maxval,
        payload: tok.pos + 1,
    })
}

pub(super) fn decode(bytes: &[u8], path: &Path) -> Result<Image> {
    let header = parse_header(bytes, path)?;
    let channels = match &header.magic {
        b"P2" | b"P5" => 1,
        _ => 3,
    };
    let n = header.width * header.height * channels;
    let samples: Vec<u32> = match &header.magic {
        b"P5" | b"P6" => {
            let wide = header.maxval > 255;
            let need = n * if wide { 2 } else { 1 };
            let payload = bytes.get(header.payload..).unwrap_or(&[]);
            if payload.len() < need {
                return Err(LoadError::TruncatedPayload {
                    path: path.to_path_buf(),
                    expected: need,
                    found: payload.len(),
                }
                .into());
            }
            if wide {
                payload[..need]
                    .chunks_exact(2)
                    .map(|b| u16::from_be_bytes([b[0], b[1]]) as u32)
                    .collect()
            } else {
                payload[..n].iter().map(|&b| b as u32).collect()
            }
        }
        _ => {
            let mut tok = Tokens {
                bytes,
                pos: header.payload.min(bytes.len()),
            };
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                match tok.next_token() {
                    Some(t) => {
                        let v = std::str::from_utf8(t)
                            .ok()
                            .and_then(|s| s.parse::<u32>().ok())
                            .ok_or_else(|| LoadError::MalformedPayload {
                                path: path.to_path_buf(),
                                reason: format!("bad sample {:?}", String::from_utf8_lossy(t)),
                            })?;
                        out.push(v);
                    }
                    None => {
                        return Err(LoadError::TruncatedPayload {
                            path: path.to_path_buf(),
                            expected: n,
                            found: out.len(),
                        }
                        .into())
                    }
                }
            }
            out
        }
    };
    if let Some(v) = samples.iter().find(|&&v| v > header.maxval) {
        return Err(LoadError::MalformedPayload {
            path: path.to_path_buf(),
            reason: format!("sample {v} exceeds maxval {}", header.maxval),
        }
        .into());
    }
    let scale = header.maxval as f32;
    let values: Vec<f32> = if channels == 1 {
        samples.iter().map(|&v| v as f32 / scale).collect()
    } else {
        samples
            .chunks_exact(3)
            .map(|rgb| {
                let luma: f32 = rgb.iter().zip(LUMA).map(|(&c, w)| w * c as f32).sum();
                (luma / scale).clamp(0.0, 1.0)
            })
            .collect()
    };
    Map::from_values(header.width, header.height, values)
}

/// Writes an 8-bit binary PGM, min-max scaling valid samples to `0..=255`.
/// Invalid pixels are written as 0.
pub fn save_preview<T: Copy + Into<f64>>(map: &Map<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (lo, hi) = map
        .iter_valid()
        .map(|(_, _, v)| v.into())
        .filter(|v: &f64| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n{} {}\n255\n", map.width(), map.height()).into_bytes();
    out.extend(map.values().iter().zip(map.valid_mask()).map(|(&v, &ok)| {
        let v: f64 = v.into();
        if ok && v.is_finite() {
            (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    write_file(path, out)
}

fn write_file(path: &Path, bytes: Vec<u8>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes intensities in `[0, 1]` as a 16-bit binary PGM; invalid pixels become 0.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("P5\n{} {}\n65535\n", img.width(), img.height()).into_bytes();
    for (&v, &ok) in img.values().iter().zip(img.valid_mask()) {
        let q = if ok { (v.clamp(0.0, 1.0) as f64 * 65535.0).round() as u16 } else { 0 };
        out.extend(q.to_be_bytes());
    }
    write_file(path.as_ref(), out)
}

/// Writes a boolean mask as an 8-bit PGM with set pixels at 255.
pub fn save_mask(mask: &Map<bool>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.values().iter().map(|&m| if m { 255u8 } else { 0 }));
    write_file(path.as_ref(), out)
}
