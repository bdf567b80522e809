//! Calibration, disparity/depth triangulation and the weighted depth loss.

use std::path::Path;

use crate::confidence::WeightMap;
use crate::error::{Error, Result};
use crate::imagery::Map;
use crate::matcher::DisparityMap;

/// Depth in meters.
pub type DepthMap = Map<f64>;

/// Disparities at or below this many pixels are treated as infinitely far.
pub const MIN_DISPARITY: f64 = 1e-3;
/// Depths at or below this many meters have no finite disparity.
pub const MIN_DEPTH: f64 = 1e-3;
pub const DEFAULT_DEPTH_CAP: f64 = 80.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibratedRig {
    /// Focal length in pixels.
    pub focal: f64,
    /// Baseline in meters.
    pub baseline: f64,
    /// Depth clamp in meters.
    pub depth_cap: f64,
}

impl CalibratedRig {
    pub fn new(focal: f64, baseline: f64, depth_cap: f64) -> Result<Self> {
        for (name, v) in [("f", focal), ("B", baseline), ("depth_cap", depth_cap)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Calibration(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            focal,
            baseline,
            depth_cap,
        })
    }

    /// Parses `key=value` lines (`f`, `B`, optional `depth_cap`); `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let (mut f, mut b, mut cap) = (None, None, None);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Calibration(format!("line {}: expected key=value", lineno + 1)))?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Calibration(format!("line {}: {:?} is not a number", lineno + 1, value.trim()))
            })?;
            match key.trim() {
                "f" => f = Some(value),
                "B" => b = Some(value),
                "depth_cap" => cap = Some(value),
                other => {
                    return Err(Error::Calibration(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let f = f.ok_or_else(|| Error::Calibration("missing f".into()))?;
        let b = b.ok_or_else(|| Error::Calibration("missing B".into()))?;
        Self::new(f, b, cap.unwrap_or(DEFAULT_DEPTH_CAP))
    }

    fn focal_baseline(&self) -> f64 {
        self.focal * self.baseline
    }
}

pub fn load_calibration(path: impl AsRef<Path>) -> Result<CalibratedRig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::Calibration(format!("{}: not found", path.display()))
        } else {
            Error::Calibration(format!("{}: {e}", path.display()))
        }
    })?;
    CalibratedRig::parse(&text)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangulated {
    pub depth: DepthMap,
    /// Pixels whose depth was clamped to the rig's cap.
    pub clamped: usize,
}

/// `D = f * B / d`, clamped to the depth cap. Disparities `<= MIN_DISPARITY`
/// produce invalid pixels.
pub fn disparity_to_depth(disparity: &DisparityMap, rig: &CalibratedRig) -> Result<Triangulated> {
    let mut depth = Map::invalid(disparity.width(), disparity.height(), 0.0f64)?;
    let mut clamped = 0;
    for (x, y, d) in disparity.iter_valid() {
        let d = d as f64;
        if d <= MIN_DISPARITY {
            continue;
        }
        let mut z = rig.focal_baseline() / d;
        if z > rig.depth_cap {
            z = rig.depth_cap;
            clamped += 1;
        }
        depth.set(x, y, z);
    }
    Ok(Triangulated { depth, clamped })
}

/// Full-precision inverse, `d = f * B / D`. Depths `<= MIN_DEPTH` are invalid.
pub fn depth_to_disparity_f64(depth: &DepthMap, rig: &CalibratedRig) -> Result<Map<f64>> {
    let mut out = Map::invalid(depth.width(), depth.height(), 0.0f64)?;
    for (x, y, z) in depth.iter_valid() {
        if z > MIN_DEPTH && z.is_finite() {
            out.set(x, y, rig.focal_baseline() / z);
        }
    }
    Ok(out)
}

/// `d = f * B / D` as a disparity map.
pub fn depth_to_disparity(depth: &DepthMap, rig: &CalibratedRig) -> Result<DisparityMap> {
    Ok(depth_to_disparity_f64(depth, rig)?.map_values(|d| d as f32))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossReport {
    /// Weighted mean absolute depth error in meters.
    pub loss: f64,
    /// Sum of weights over contributing pixels.
    pub weight_sum: f64,
    /// Pixels valid in all three inputs.
    pub pixels: usize,
}

/// `L = (1/Z) * sum_p W(p) * |D_m(p) - D_s(p)|` with `Z = sum_p W(p)`, over
/// pixels valid in all three maps, summed in row-major order.
pub fn weighted_depth_loss(student: &DepthMap, pseudo: &DepthMap, weights: &WeightMap) -> Result<LossReport> {
    if !student.same_shape(pseudo) || !student.same_shape(weights) {
        return Err(Error::arg(format!(
            "loss inputs differ in shape: {}x{}, {}x{}, {}x{}",
            student.width(),
            student.height(),
            pseudo.width(),
            pseudo.height(),
            weights.width(),
            weights.height()
        )));
    }
    let mut num = 0.0f64;
    let mut z = 0.0f64;
    let mut pixels = 0usize;
    for (x, y, dm) in student.iter_valid() {
        let (Some(ds), Some(w)) = (pseudo.get(x, y), weights.get(x, y)) else {
            continue;
        };
        num += w * (dm - ds).abs();
        z += w;
        pixels += 1;
    }
    if z <= 0.0 {
        return Err(Error::DegenerateWeights { pixels });
    }
    Ok(LossReport {
        loss: num / z,
        weight_sum: z,
        pixels,
    })
}
