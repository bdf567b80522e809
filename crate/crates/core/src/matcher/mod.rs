//! Dense local stereo matching on rectified pairs.
//!
//! The matcher is a plain cost-volume pipeline: census or SAD matching costs
//! over a square window, optional box aggregation, then winner-take-all with
//! parabola subpixel refinement and optional uniqueness and left-right checks.
//! Every stage is a pure function of its inputs and parallelizes by image row,
//! so results are bit-identical regardless of thread count.

mod cost;
mod wta;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagery::{Image, Map};

pub use cost::{aggregate, compute_cost_volume, CostVolume};
pub use wta::winner_take_all;

/// Per-pixel disparity in pixels; the match is `right(x - d, y)`.
pub type DisparityMap = Map<f32>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    /// Hamming distance between census descriptors.
    #[default]
    Census,
    /// Mean absolute intensity difference.
    Sad,
}

impl std::str::FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "census" => Ok(CostKind::Census),
            "sad" => Ok(CostKind::Sad),
            other => Err(Error::config(format!("unknown cost kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatcherConfig {
    pub cost: CostKind,
    /// Matching window is `(2r + 1)^2` pixels.
    pub window_radius: usize,
    /// Smallest disparity searched (may be negative).
    pub d_lo: i32,
    /// Largest disparity searched; also the `d_max` fed to the weight map.
    pub d_hi: i32,
    /// Box-filter radius applied to each cost slice, 0 disables.
    pub aggregation_radius: usize,
    pub subpixel: bool,
    pub lr_check_threshold: Option<f32>,
    pub uniqueness_ratio: Option<f32>,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            cost: CostKind::Census,
            window_radius: 3,
            d_lo: 0,
            d_hi: 64,
            aggregation_radius: 2,
            subpixel: true,
            lr_check_threshold: Some(1.0),
            uniqueness_ratio: Some(1.05),
        }
    }
}

impl MatcherConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_lo > self.d_hi {
            return Err(Error::config(format!(
                "disparity range [{}, {}] is empty",
                self.d_lo, self.d_hi
            )));
        }
        if self.window_radius < 1 {
            return Err(Error::config("window_radius must be at least 1"));
        }
        if let Some(r) = self.uniqueness_ratio {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::config(format!("uniqueness_ratio must be >= 1, got {r}")));
            }
        }
        if let Some(t) = self.lr_check_threshold {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::config(format!("lr_check_threshold must be >= 0, got {t}")));
            }
        }
        Ok(())
    }

    /// Same configuration with the search range moved by `k` pixels.
    pub fn offset_range(&self, k: i32) -> Self {
        Self {
            d_lo: self.d_lo + k,
            d_hi: self.d_hi + k,
            ..self.clone()
        }
    }

    pub fn num_disparities(&self) -> usize {
        (self.d_hi - self.d_lo + 1) as usize
    }
}

/// Computes the disparity map of `left` against `right`.
pub fn match_pair(left: &Image, right: &Image, cfg: &MatcherConfig) -> Result<DisparityMap> {
    let cv = compute_cost_volume(left, right, cfg)?;
    winner_take_all(&cv, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        MatcherConfig::default().validate().unwrap();
    }

    #[test]
    fn config_contract() {
        let bad = [
            MatcherConfig { d_lo: 5, d_hi: 4, ..Default::default() },
            MatcherConfig { window_radius: 0, ..Default::default() },
            MatcherConfig { uniqueness_ratio: Some(0.9), ..Default::default() },
            MatcherConfig { lr_check_threshold: Some(-1.0), ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
        MatcherConfig { d_lo: -8, d_hi: -8, ..Default::default() }.validate().unwrap();
    }

    #[test]
    fn config_from_toml_keeps_defaults() {
        let cfg: MatcherConfig = toml::from_str("cost = \"sad\"\nd_lo = -16\n").unwrap();
        assert_eq!(cfg.cost, CostKind::Sad);
        assert_eq!(cfg.d_lo, -16);
        assert_eq!(cfg.d_hi, 64);
        assert!(toml::from_str::<MatcherConfig>("bogus = 1").is_err());
    }
}
