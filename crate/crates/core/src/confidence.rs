//! Per-pixel unreliability from sweep disagreement, and the derived weights.
//!
//! For an ideal matcher the plane shifted by `k` reports `d0 + k`, so the
//! compensated disparity `d_k - k` equals the reference `d0` on every plane.
//! The unreliability score `U` is the mean absolute violation of that rule
//! over the non-zero shifts, and the weight is `W = exp(-sigma * U / d_max)`
//! with `sigma` fixed so that `U = 1` maps to `W = 0.5`.

use crate::error::{Error, Result};
use crate::imagery::Map;
use crate::sweep::SweepStack;

/// Mean absolute disagreement in pixels; invalid where it cannot be scored.
pub type UnreliabilityMap = Map<f64>;

/// Confidence weights in `[0, 1]`. Every pixel is valid; pixels without an
/// unreliability score carry weight 0.
pub type WeightMap = Map<f64>;

/// Scores every pixel by how far the compensated sweep disparities stray
/// from the reference plane.
///
/// The `k = 0` plane contributes exactly zero and the sum is normalized by
/// the number of non-zero planes (`N - 1` for a dense stack). Planes where
/// the pixel is invalid are skipped and the normalizer shrinks accordingly.
/// Pixels with an invalid reference, or with no valid non-zero plane, are
/// invalid.
pub fn unreliability(stack: &SweepStack) -> Result<UnreliabilityMap> {
    if stack.len() < 2 {
        return Err(Error::arg(format!(
            "unreliability needs at least 2 planes, stack has {}",
            stack.len()
        )));
    }
    let reference = stack.reference();
    let (w, h) = (reference.width(), reference.height());
    let mut out = Map::invalid(w, h, 0.0f64)?;
    for y in 0..h {
        for x in 0..w {
            let Some(d0) = reference.get(x, y) else { continue };
            let mut sum = 0.0f64;
            let mut count = 0usize;
            for plane in stack.planes().iter().filter(|p| p.shift != 0) {
                if let Some(dk) = plane.disparity.get(x, y) {
                    sum += (d0 as f64 - (dk as f64 - plane.shift as f64)).abs();
                    count += 1;
                }
            }
            if count > 0 {
                out.set(x, y, sum / count as f64);
            }
        }
    }
    Ok(out)
}

/// Number of non-zero planes that score each pixel, i.e. the normalizer of
/// [`unreliability`]. Invalid where the reference is invalid.
pub fn plane_support(stack: &SweepStack) -> Result<Map<f32>> {
    let reference = stack.reference();
    let mut out = Map::invalid(reference.width(), reference.height(), 0.0f32)?;
    for (x, y, _) in reference.iter_valid() {
        let n = stack
            .planes()
            .iter()
            .filter(|p| p.shift != 0 && p.disparity.is_valid(x, y))
            .count();
        out.set(x, y, n as f32);
    }
    Ok(out)
}

// U = 1 must give W = 0.5: exp(-sigma / d_max) = 1/2.
fn sigma(d_max: f64) -> f64 {
    d_max * std::f64::consts::LN_2
}

/// `W(p) = exp(-sigma * U(p) / d_max)`; invalid `U` maps to `W = 0`.
///
/// Since `sigma = d_max * ln 2`, this equals `2^-U` for every positive
/// `d_max`.
pub fn weight_map(u: &UnreliabilityMap, d_max: f64) -> Result<WeightMap> {
    if !(d_max > 0.0 && d_max.is_finite()) {
        return Err(Error::arg(format!("d_max must be positive, got {d_max}")));
    }
    let s = sigma(d_max);
    let values = u
        .values()
        .iter()
        .zip(u.valid_mask())
        .map(|(&v, &ok)| if ok { (-s * v / d_max).exp() } else { 0.0 })
        .collect();
    Map::from_values(u.width(), u.height(), values)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileEntry {
    pub shift: i32,
    /// `d_k(p) - k`, or `None` where the plane has no disparity at `p`.
    pub compensated: Option<f64>,
}

/// Compensated disparity of every plane at one pixel.
pub fn profile_at(stack: &SweepStack, x: usize, y: usize) -> Result<Vec<ProfileEntry>> {
    if x >= stack.width() || y >= stack.height() {
        return Err(Error::arg(format!(
            "pixel ({x}, {y}) outside {}x{}",
            stack.width(),
            stack.height()
        )));
    }
    Ok(stack
        .planes()
        .iter()
        .map(|p| ProfileEntry {
            shift: p.shift,
            compensated: p.disparity.get(x, y).map(|d| d as f64 - p.shift as f64),
        })
        .collect())
}
