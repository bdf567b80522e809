//! Masked image grids, file I/O, and the horizontal shift that realizes the
//! disparity plane sweep.
//!
//! Every raster in the crate is a [`Map`]: a row-major grid of values paired
//! with a per-pixel validity mask. Intensity images, disparity maps, depth
//! maps, unreliability scores and weights are all aliases of it, differing
//! only in the sample type and in which invariants the producer guarantees.

mod pfm;
mod pnm;

use std::path::Path;

use crate::error::{Error, LoadError, Result};

pub use pfm::{load_map, read_pfm, save_map, write_pfm};
pub use pnm::{save_image, save_mask, save_preview};

/// Row-major grid of samples with a per-pixel validity mask.
///
/// Equality ignores whatever is stored under invalid pixels.
#[derive(Clone, Debug)]
pub struct Map<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
    valid: Vec<bool>,
}

impl<T: PartialEq> PartialEq for Map<T> {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.valid == other.valid
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.valid)
                .all(|((a, b), &ok)| !ok || a == b)
    }
}

/// Grayscale intensity image, normalized to `[0, 1]` at valid pixels.
pub type Image = Map<f32>;

impl<T: Copy> Map<T> {
    /// A `width` x `height` grid where every pixel holds `value` and is valid.
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            values: vec![value; width * height],
            valid: vec![true; width * height],
        })
    }

    /// A grid where every pixel is invalid; `fill` is the placeholder sample.
    pub fn invalid(width: usize, height: usize, fill: T) -> Result<Self> {
        let mut map = Self::filled(width, height, fill)?;
        map.valid.iter_mut().for_each(|v| *v = false);
        Ok(map)
    }

    pub fn from_parts(width: usize, height: usize, values: Vec<T>, valid: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        let n = width * height;
        if values.len() != n || valid.len() != n {
            return Err(Error::arg(format!(
                "grid {width}x{height} needs {n} samples, got {} values and {} mask entries",
                values.len(),
                valid.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    /// All pixels valid.
    pub fn from_values(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        let n = values.len();
        Self::from_parts(width, height, values, vec![true; n])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_shape<U>(&self, other: &Map<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    /// Raw sample regardless of validity.
    #[inline]
    pub fn value(&self, x: usize, y: usize) -> T {
        self.values[self.index(x, y)]
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[self.index(x, y)]
    }

    /// Sample at a valid pixel, `None` if invalid or out of bounds.
    pub fn get(&self, x: usize, y: usize) -> Option<T> {
        if x >= self.width || y >= self.height {
            return None;
        }
        let i = self.index(x, y);
        self.valid[i].then(|| self.values[i])
    }

    pub fn set(&mut self, x: usize, y: usize, value: T) {
        let i = self.index(x, y);
        self.values[i] = value;
        self.valid[i] = true;
    }

    pub fn invalidate(&mut self, x: usize, y: usize) {
        let i = self.index(x, y);
        self.valid[i] = false;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<bool>) {
        (self.values, self.valid)
    }

    pub fn domain(&self) -> PixelDomain {
        PixelDomain {
            width: self.width,
            height: self.height,
        }
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Applies `f` to every sample, keeping the mask.
    pub fn map_values<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> Map<U> {
        Map {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| f(v)).collect(),
            valid: self.valid.clone(),
        }
    }

    /// Iterates `(x, y, value)` over valid pixels in row-major order.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.domain().into_iter().filter_map(move |(x, y)| self.get(x, y).map(|v| (x, y, v)))
    }
}

impl Image {
    /// Builds an intensity image, checking every valid sample is finite and in `[0, 1]`.
    pub fn from_intensity(width: usize, height: usize, values: Vec<f32>, valid: Vec<bool>) -> Result<Self> {
        let img = Self::from_parts(width, height, values, valid)?;
        if let Some((x, y, v)) = img.iter_valid().find(|&(_, _, v)| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Precondition(format!(
                "intensity {v} at ({x}, {y}) outside [0, 1]"
            )));
        }
        Ok(img)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::arg(format!("grid dimensions must be positive, got {width}x{height}")));
    }
    Ok(())
}

/// The coordinate set of an image, iterated row-major.
#[derive(Clone, Copy, Debug)]
pub struct PixelDomain {
    width: usize,
    height: usize,
}

impl PixelDomain {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }
}

impl IntoIterator for PixelDomain {
    type Item = (usize, usize);
    type IntoIter = DomainIter;

    fn into_iter(self) -> DomainIter {
        DomainIter {
            width: self.width,
            len: self.width * self.height,
            next: 0,
        }
    }
}

pub struct DomainIter {
    width: usize,
    len: usize,
    next: usize,
}

impl Iterator for DomainIter {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        if self.next >= self.len {
            return None;
        }
        let i = self.next;
        self.next += 1;
        Some((i % self.width, i / self.width))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.len - self.next;
        (n, Some(n))
    }
}

impl ExactSizeIterator for DomainIter {}

/// Horizontally shifts `img` by `k` pixels: `out(x, y) = img(x + k, y)`.
///
/// Columns whose source falls outside the image come out invalid. With this
/// convention a scene point at disparity `d` in the original pair sits at
/// disparity `d + k` when the right image is shifted.
pub fn shift_right_image(img: &Image, k: i32) -> Result<Image> {
    let w = img.width as i64;
    if (k as i64).abs() >= w {
        return Err(Error::arg(format!(
            "shift {k} out of range for width {}",
            img.width
        )));
    }
    let mut out = Map::invalid(img.width, img.height, 0.0f32)?;
    for y in 0..img.height {
        for x in 0..img.width {
            let src = x as i64 + k as i64;
            if (0..w).contains(&src) {
                if let Some(v) = img.get(src as usize, y) {
                    out.set(x, y, v);
                }
            }
        }
    }
    Ok(out)
}

/// Loads a PGM, PPM or single-channel PFM file as a normalized intensity image.
///
/// Integer formats are divided by their maxval, PPM is reduced to luma, and
/// PFM samples outside `[0, 1]` are clamped. Non-finite PFM samples become
/// invalid pixels.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match bytes.get(..2) {
        Some(b"P2" | b"P3" | b"P5" | b"P6") => Ok(pnm::decode(&bytes, path)?),
        Some(b"Pf" | b"PF") => {
            let map = pfm::decode(&bytes, path)?;
            let (lo, hi) = map
                .iter_valid()
                .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), (_, _, v)| (lo.min(v), hi.max(v)));
            if lo < 0.0 || hi > 1.0 {
                Ok(map.map_values(|v| v.clamp(0.0, 1.0)))
            } else {
                Ok(map)
            }
        }
        _ => Err(LoadError::UnsupportedFormat {
            path: path.to_path_buf(),
            magic: String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned(),
        }
        .into()),
    }
}
