//! Standard depth-evaluation metrics (Abs Rel, Sq Rel, RMSE, RMSE log and
//! the 1.25^i threshold accuracies).

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DepthMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub pixel_count: usize,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "abs_rel", "sq_rel", "rmse", "rmse_log", "delta1", "delta2", "delta3", "pixels"
        )?;
        write!(
            f,
            "{:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10}",
            self.abs_rel,
            self.sq_rel,
            self.rmse,
            self.rmse_log,
            self.delta1,
            self.delta2,
            self.delta3,
            self.pixel_count
        )
    }
}

/// Evaluation window as fractions of the image dimensions; bounds are
/// half-open after flooring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalCrop {
    pub row_lo_frac: f64,
    pub row_hi_frac: f64,
    pub col_lo_frac: f64,
    pub col_hi_frac: f64,
}

impl EvalCrop {
    pub fn new(row_lo_frac: f64, row_hi_frac: f64, col_lo_frac: f64, col_hi_frac: f64) -> Result<Self> {
        let ok = |lo: f64, hi: f64| (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo < hi;
        if !ok(row_lo_frac, row_hi_frac) || !ok(col_lo_frac, col_hi_frac) {
            return Err(Error::arg("crop fractions must satisfy 0 <= lo < hi <= 1"));
        }
        Ok(Self {
            row_lo_frac,
            row_hi_frac,
            col_lo_frac,
            col_hi_frac,
        })
    }

    pub fn full() -> Self {
        Self {
            row_lo_frac: 0.0,
            row_hi_frac: 1.0,
            col_lo_frac: 0.0,
            col_hi_frac: 1.0,
        }
    }

    /// Row and column index ranges for an image of `height` x `width`.
    pub fn bounds(&self, height: usize, width: usize) -> (Range<usize>, Range<usize>) {
        let at = |frac: f64, n: usize| ((frac * n as f64).floor() as usize).min(n);
        (
            at(self.row_lo_frac, height)..at(self.row_hi_frac, height),
            at(self.col_lo_frac, width)..at(self.col_hi_frac, width),
        )
    }
}

/// The conventional KITTI evaluation crop.
pub fn garg_crop() -> EvalCrop {
    EvalCrop {
        row_lo_frac: 0.40810811,
        row_hi_frac: 0.99189189,
        col_lo_frac: 0.03594771,
        col_hi_frac: 0.96405229,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// Clamp the reference to the cap as well as the prediction.
    pub clamp_gt: bool,
    /// Rescale the prediction by `median(gt) / median(pred)` first.
    pub median_scaling: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            clamp_gt: true,
            median_scaling: false,
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Compares `pred` against `gt` over mutually valid, positive pixels inside
/// `crop`, with depths clamped to `cap`.
pub fn evaluate(pred: &DepthMap, gt: &DepthMap, crop: &EvalCrop, cap: f64, opts: EvalOptions) -> Result<MetricsReport> {
    if !pred.same_shape(gt) {
        return Err(Error::arg(format!(
            "prediction is {}x{} but reference is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    if !(cap > 0.0) {
        return Err(Error::arg(format!("depth cap must be positive, got {cap}")));
    }
    let (rows, cols) = crop.bounds(gt.height(), gt.width());
    let mut pairs = Vec::new();
    for y in rows {
        for x in cols.clone() {
            let (Some(p), Some(g)) = (pred.get(x, y), gt.get(x, y)) else {
                continue;
            };
            if !(p > 0.0 && g > 0.0 && p.is_finite() && g.is_finite()) {
                continue;
            }
            let g = if opts.clamp_gt { g.min(cap) } else { g };
            pairs.push((p, g));
        }
    }
    if pairs.is_empty() {
        return Err(Error::Evaluation("no evaluable pixels".into()));
    }
    if opts.median_scaling {
        let mut ps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut gs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let ratio = median(&mut gs) / median(&mut ps);
        pairs.iter_mut().for_each(|p| p.0 *= ratio);
    }
    pairs.iter_mut().for_each(|p| p.0 = p.0.min(cap));

    let n = pairs.len() as f64;
    let mut acc = [0.0f64; 4];
    let mut hits = [0usize; 3];
    let thresholds = [1.25, 1.25f64.powi(2), 1.25f64.powi(3)];
    for &(p, g) in &pairs {
        let diff = p - g;
        acc[0] += diff.abs() / g;
        acc[1] += diff * diff / g;
        acc[2] += diff * diff;
        let ld = p.ln() - g.ln();
        acc[3] += ld * ld;
        let ratio = (p / g).max(g / p);
        for (hit, t) in hits.iter_mut().zip(thresholds) {
            if ratio < t {
                *hit += 1;
            }
        }
    }
    Ok(MetricsReport {
        abs_rel: acc[0] / n,
        sq_rel: acc[1] / n,
        rmse: (acc[2] / n).sqrt(),
        rmse_log: (acc[3] / n).sqrt(),
        delta1: hits[0] as f64 / n,
        delta2: hits[1] as f64 / n,
        delta3: hits[2] as f64 / n,
        pixel_count: pairs.len(),
    })
}
