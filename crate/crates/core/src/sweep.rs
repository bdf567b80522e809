//! Disparity plane sweep: match the left image against copies of the right
//! image shifted by each `k` in a symmetric, evenly spaced shift set.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagery::{load_map, save_map, shift_right_image, Image};
use crate::matcher::{match_pair, DisparityMap, MatcherConfig};

/// How the matcher's search range follows the shift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMode {
    /// Every plane searches the configured `[d_lo, d_hi]`, like a network
    /// with a fixed output range. Content pushed outside it cannot be matched.
    #[default]
    Fixed,
    /// Plane `k` searches `[d_lo + k, d_hi + k]`, tracking the shifted support.
    Shifted,
}

impl std::str::FromStr for RangeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" | "fixed_range" => Ok(RangeMode::Fixed),
            "shifted" | "shifted_range" => Ok(RangeMode::Shifted),
            other => Err(Error::config(format!("unknown range mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Largest shift magnitude `K` in pixels.
    pub max_shift: u32,
    /// Number of planes `N`, odd so that `k = 0` is one of them.
    pub planes: usize,
    pub range_mode: RangeMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            max_shift: 16,
            planes: 5,
            range_mode: RangeMode::Fixed,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let (k, n) = (self.max_shift as usize, self.planes);
        if n < 2 {
            return Err(Error::config(format!("sweep needs at least 2 planes, got {n}")));
        }
        if n % 2 == 0 {
            return Err(Error::config(format!(
                "plane count {n} is even, so k = 0 would not be a plane"
            )));
        }
        if k == 0 {
            return Err(Error::config("max shift must be positive"));
        }
        if (2 * k) % (n - 1) != 0 {
            return Err(Error::config(format!(
                "2K = {} is not divisible by N - 1 = {}",
                2 * k,
                n - 1
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> i32 {
        (2 * self.max_shift as usize / (self.planes - 1)) as i32
    }
}

/// `{-K, -K + s, ..., 0, ..., K}` with `s = 2K / (N - 1)`.
pub fn build_shift_set(cfg: &SweepConfig) -> Result<Vec<i32>> {
    cfg.validate()?;
    let k = cfg.max_shift as i32;
    let step = cfg.step();
    Ok((0..cfg.planes as i32).map(|i| -k + i * step).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlane {
    pub shift: i32,
    pub disparity: DisparityMap,
}

/// Disparity maps of every swept pair, ordered by shift.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepStack {
    planes: Vec<SweepPlane>,
    reference: usize,
}

impl SweepStack {
    /// Assembles a stack from planes given in any order.
    ///
    /// Fails unless shifts are distinct with a constant step, exactly one
    /// is zero, and all maps share dimensions.
    pub fn from_planes(planes: impl IntoIterator<Item = (i32, DisparityMap)>) -> Result<Self> {
        let mut planes: Vec<SweepPlane> = planes
            .into_iter()
            .map(|(shift, disparity)| SweepPlane { shift, disparity })
            .collect();
        planes.sort_by_key(|p| p.shift);
        let first = planes.first().ok_or_else(|| Error::arg("empty sweep stack"))?;
        if planes.iter().any(|p| !p.disparity.same_shape(&first.disparity)) {
            return Err(Error::arg("sweep planes differ in dimensions"));
        }
        let steps: Vec<i32> = planes.windows(2).map(|w| w[1].shift - w[0].shift).collect();
        if steps.iter().any(|&s| s <= 0 || s != steps[0]) {
            return Err(Error::arg(format!(
                "shifts {:?} are not strictly increasing with a constant step",
                planes.iter().map(|p| p.shift).collect::<Vec<_>>()
            )));
        }
        let reference = planes
            .iter()
            .position(|p| p.shift == 0)
            .ok_or_else(|| Error::arg("sweep stack has no k = 0 plane"))?;
        Ok(Self { planes, reference })
    }

    pub fn planes(&self) -> &[SweepPlane] {
        &self.planes
    }

    /// The unshifted (`k = 0`) disparity map.
    pub fn reference(&self) -> &DisparityMap {
        &self.planes[self.reference].disparity
    }

    pub fn shifts(&self) -> Vec<i32> {
        self.planes.iter().map(|p| p.shift).collect()
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn width(&self) -> usize {
        self.reference().width()
    }

    pub fn height(&self) -> usize {
        self.reference().height()
    }

    /// Writes one PFM per plane into `dir`, named by [`plane_file_name`].
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for p in &self.planes {
            save_map(&p.disparity, dir.join(plane_file_name(p.shift)))?;
        }
        Ok(())
    }

    /// Reads every `plane_k*.pfm` in `dir`.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut planes = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|source| Error::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            let name = entry.file_name();
            if let Some(k) = name.to_str().and_then(parse_plane_file_name) {
                planes.push((k, load_map(entry.path())?));
            }
        }
        Self::from_planes(planes)
    }
}

/// `plane_k-16.pfm`, `plane_k+00.pfm`, `plane_k+08.pfm`, ...
pub fn plane_file_name(shift: i32) -> String {
    format!("plane_k{shift:+03}.pfm")
}

pub fn parse_plane_file_name(name: &str) -> Option<i32> {
    name.strip_prefix("plane_k")?.strip_suffix(".pfm")?.parse().ok()
}

/// Matches `left` against `right` shifted by `k`.
pub fn sweep_plane(
    left: &Image,
    right: &Image,
    matcher: &MatcherConfig,
    mode: RangeMode,
    k: i32,
) -> Result<DisparityMap> {
    let shifted = shift_right_image(right, k)?;
    let cfg = match mode {
        RangeMode::Fixed => matcher.clone(),
        RangeMode::Shifted => matcher.offset_range(k),
    };
    match_pair(left, &shifted, &cfg)
}

/// Runs the matcher on every swept pair. Planes are computed in parallel and
/// gathered in shift order.
pub fn run_sweep(left: &Image, right: &Image, matcher: &MatcherConfig, sweep: &SweepConfig) -> Result<SweepStack> {
    let shifts = build_shift_set(sweep)?;
    if sweep.max_shift as usize >= left.width() {
        return Err(Error::arg(format!(
            "max shift {} must be below image width {}",
            sweep.max_shift,
            left.width()
        )));
    }
    let planes = shifts
        .par_iter()
        .map(|&k| sweep_plane(left, right, matcher, sweep.range_mode, k).map(|d| (k, d)))
        .collect::<Result<Vec<_>>>()?;
    SweepStack::from_planes(planes)
}
