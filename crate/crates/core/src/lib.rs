//! Training-free stereo confidence from disparity plane sweeps.
//!
//! A classical matcher is run on the stereo pair and on copies with the right
//! image shifted by `k` pixels. An ideal matcher reports `d + k` on each
//! shifted pair; pixels where the compensated disparities disagree are
//! scored as unreliable and down-weighted in a pseudo-depth loss.

pub mod confidence;
pub mod error;
pub mod geometry;
pub mod imagery;
pub mod matcher;
pub mod metrics;
pub mod pipeline;
pub mod sweep;
pub mod synth;

pub use confidence::{plane_support, profile_at, unreliability, weight_map, ProfileEntry, UnreliabilityMap, WeightMap};
pub use error::{Error, LoadError, Result};
pub use geometry::{
    depth_to_disparity, disparity_to_depth, load_calibration, weighted_depth_loss, CalibratedRig, DepthMap,
    LossReport, Triangulated,
};
pub use imagery::{load_image, load_map, save_map, shift_right_image, Image, Map};
pub use matcher::{match_pair, CostKind, DisparityMap, MatcherConfig};
pub use metrics::{evaluate, garg_crop, EvalCrop, EvalOptions, MetricsReport};
pub use pipeline::{run_pipeline, PipelineOutput, PipelineParams};
pub use sweep::{build_shift_set, run_sweep, RangeMode, SweepConfig, SweepStack};
pub use synth::{oracle_check, render, GroundTruth, OracleReport, SceneSpec};
