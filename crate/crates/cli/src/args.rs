use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use sweepconf::{CostKind, RangeMode};

/// Stereo confidence from disparity plane sweeps.
#[derive(Debug, Parser)]
#[command(name = "sweepconf", version)]
pub struct Cli {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Print summaries as JSON
    #[arg(long, global = true)]
    pub json: bool,

    /// TOML file with [matcher], [sweep] and [io] defaults; flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep, score, weight and triangulate a stereo pair
    Pipeline(PipelineArgs),
    /// Match one stereo pair
    Match(MatchArgs),
    /// Write the disparity map of every swept pair
    Sweep(SweepArgs),
    /// Unreliability and weight maps from a directory of sweep planes
    Weight(WeightArgs),
    /// Convert a disparity map to depth
    Depth(DepthArgs),
    /// Weighted absolute depth loss
    Loss(LossArgs),
    /// Depth metrics against a reference
    Eval(EvalArgs),
    /// Render a synthetic scene with ground truth
    Synth(SynthArgs),
    /// Compensated disparity profile at one pixel
    Profile(ProfileArgs),
}

/// A threshold that can be switched off with `off`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Toggle(pub Option<f32>);

impl FromStr for Toggle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" | "none" => Ok(Toggle(None)),
            v => v
                .parse::<f32>()
                .map(|x| Toggle(Some(x)))
                .map_err(|_| format!("expected a number or `off`, got {v:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct MatcherFlags {
    /// Matching cost
    #[arg(long, value_parser = parse_cost)]
    pub cost: Option<CostKind>,
    /// Cost window radius R, window is (2R+1)^2
    #[arg(long)]
    pub window: Option<usize>,
    /// Box aggregation radius, 0 disables
    #[arg(long)]
    pub aggregation: Option<usize>,
    /// Lowest disparity searched
    #[arg(long, allow_hyphen_values = true)]
    pub dmin: Option<i32>,
    /// Highest disparity searched; also d_max of the weight
    #[arg(long, allow_hyphen_values = true)]
    pub dmax: Option<i32>,
    /// Disable parabola subpixel refinement
    #[arg(long)]
    pub no_subpixel: bool,
    /// Left-right check threshold in pixels, or `off`
    #[arg(long)]
    pub lr_check: Option<Toggle>,
    /// Uniqueness ratio, or `off`
    #[arg(long)]
    pub uniqueness: Option<Toggle>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepFlags {
    /// Largest shift K
    #[arg(long)]
    pub sweep_k: Option<u32>,
    /// Number of planes N
    #[arg(long)]
    pub sweep_n: Option<usize>,
    /// Search range policy across planes
    #[arg(long, value_parser = parse_range_mode)]
    pub range_mode: Option<RangeMode>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PairFlags {
    #[arg(long)]
    pub left: Option<PathBuf>,
    #[arg(long)]
    pub right: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub pair: PairFlags,
    /// Calibration file with f, B and optional depth_cap
    #[arg(long)]
    pub calib: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write every sweep plane here
    #[arg(long)]
    pub dump_planes: Option<PathBuf>,
    /// Skip the PGM previews
    #[arg(long)]
    pub no_previews: bool,
    /// Write profiles.json with the compensated profile at X,Y (repeatable)
    #[arg(long, value_parser = parse_pixel)]
    pub profile_at: Vec<(usize, usize)>,
    #[command(flatten)]
    pub matcher: MatcherFlags,
    #[command(flatten)]
    pub sweep: SweepFlags,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[command(flatten)]
    pub pair: PairFlags,
    /// Output disparity PFM
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub matcher: MatcherFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pair: PairFlags,
    /// Output directory for plane_k*.pfm
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub matcher: MatcherFlags,
    #[command(flatten)]
    pub sweep: SweepFlags,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Directory of plane_k*.pfm files
    #[arg(long)]
    pub planes: PathBuf,
    /// Output directory for U.pfm and W.pfm
    #[arg(long)]
    pub out: PathBuf,
    /// Largest disparity of the matcher
    #[arg(long, default_value_t = 64.0)]
    pub dmax: f64,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long)]
    pub disparity: PathBuf,
    #[arg(long)]
    pub calib: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Student depth PFM
    #[arg(long)]
    pub student: PathBuf,
    /// Pseudo-depth PFM
    #[arg(long)]
    pub pseudo: PathBuf,
    /// Weight PFM; uniform weights when omitted
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CropKind {
    Garg,
    Full,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted depth PFM
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference depth PFM
    #[arg(long)]
    pub gt: PathBuf,
    /// Depth cap in meters
    #[arg(long, default_value_t = 80.0)]
    pub cap: f64,
    #[arg(long, value_enum, default_value_t = CropKind::Garg)]
    pub crop: CropKind,
    /// Clamp the reference to the cap too
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub clamp_gt: bool,
    /// Rescale predictions by the ratio of medians
    #[arg(long)]
    pub median_scaling: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Built-in scene: clean, textureless, occlusion or reflective
    #[arg(long, conflicts_with = "scene", required_unless_present = "scene")]
    pub preset: Option<String>,
    /// TOML scene description
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Override the scene seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Directory of plane_k*.pfm files
    #[arg(long)]
    pub planes: PathBuf,
    #[arg(long)]
    pub x: usize,
    #[arg(long)]
    pub y: usize,
}

fn parse_cost(s: &str) -> Result<CostKind, String> {
    s.parse().map_err(|e: sweepconf::Error| e.to_string())
}

fn parse_range_mode(s: &str) -> Result<RangeMode, String> {
    s.parse().map_err(|e: sweepconf::Error| e.to_string())
}

fn parse_pixel(s: &str) -> Result<(usize, usize), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad coordinate {v:?}"));
    Ok((p(x)?, p(y)?))
}
