//! The full confidence pipeline: sweep, score, weight, triangulate.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::confidence::{unreliability, weight_map, UnreliabilityMap, WeightMap};
use crate::error::Result;
use crate::geometry::{disparity_to_depth, CalibratedRig, Triangulated};
use crate::imagery::Image;
use crate::matcher::{DisparityMap, MatcherConfig};
use crate::sweep::{run_sweep, SweepConfig, SweepStack};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub matcher: MatcherConfig,
    pub sweep: SweepConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub sweep: Duration,
    pub confidence: Duration,
    pub triangulation: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutput {
    pub stack: SweepStack,
    pub unreliability: UnreliabilityMap,
    pub weights: WeightMap,
    pub pseudo_depth: Triangulated,
    pub timings: StageTimings,
}

impl PipelineOutput {
    pub fn reference(&self) -> &DisparityMap {
        self.stack.reference()
    }

    pub fn mean_weight(&self) -> f64 {
        let w = self.weights.values();
        w.iter().sum::<f64>() / w.len() as f64
    }

    /// Fraction of pixels with a valid reference disparity.
    pub fn valid_fraction(&self) -> f64 {
        let r = self.reference();
        r.valid_count() as f64 / r.len() as f64
    }
}

/// Runs the sweep and derives `U`, `W` and pseudo-depth. `d_max` for the
/// weight is the matcher's upper disparity bound.
pub fn run_pipeline(left: &Image, right: &Image, rig: &CalibratedRig, params: &PipelineParams) -> Result<PipelineOutput> {
    let t = Instant::now();
    let stack = run_sweep(left, right, &params.matcher, &params.sweep)?;
    let sweep = t.elapsed();

    let t = Instant::now();
    let u = unreliability(&stack)?;
    let weights = weight_map(&u, params.matcher.d_hi.max(1) as f64)?;
    let confidence = t.elapsed();

    let t = Instant::now();
    let pseudo_depth = disparity_to_depth(stack.reference(), rig)?;
    let triangulation = t.elapsed();

    Ok(PipelineOutput {
        stack,
        unreliability: u,
        weights,
        pseudo_depth,
        timings: StageTimings {
            sweep,
            confidence,
            triangulation,
        },
    })
}
