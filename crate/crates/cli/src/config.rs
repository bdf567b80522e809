use std::path::{Path, PathBuf};

use serde::Deserialize;
use sweepconf::{Error, MatcherConfig, SweepConfig};

use crate::args::{MatcherFlags, PairFlags, SweepFlags};
use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub left: Option<PathBuf>,
    pub right: Option<PathBuf>,
    pub calib: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub dump_planes: Option<PathBuf>,
}

/// Defaults read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub matcher: MatcherConfig,
    pub sweep: SweepConfig,
    pub io: IoConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())).into())
    }
}

pub fn matcher(base: &MatcherConfig, f: &MatcherFlags) -> Result<MatcherConfig, Failure> {
    let mut m = base.clone();
    if let Some(c) = f.cost {
        m.cost = c;
    }
    if let Some(r) = f.window {
        m.window_radius = r;
    }
    if let Some(r) = f.aggregation {
        m.aggregation_radius = r;
    }
    if let Some(d) = f.dmin {
        m.d_lo = d;
    }
    if let Some(d) = f.dmax {
        m.d_hi = d;
    }
    if f.no_subpixel {
        m.subpixel = false;
    }
    if let Some(t) = f.lr_check {
        m.lr_check_threshold = t.0;
    }
    if let Some(t) = f.uniqueness {
        m.uniqueness_ratio = t.0;
    }
    m.validate()?;
    Ok(m)
}

pub fn sweep(base: &SweepConfig, f: &SweepFlags) -> Result<SweepConfig, Failure> {
    let mut s = base.clone();
    if let Some(k) = f.sweep_k {
        s.max_shift = k;
    }
    if let Some(n) = f.sweep_n {
        s.planes = n;
    }
    if let Some(m) = f.range_mode {
        s.range_mode = m;
    }
    s.validate()?;
    Ok(s)
}

pub fn required(flag: Option<PathBuf>, file: &Option<PathBuf>, name: &str) -> Result<PathBuf, Failure> {
    flag.or_else(|| file.clone())
        .ok_or_else(|| Failure::Usage(format!("--{name} is required (flag or [io] {name} in --config)")))
}

pub fn pair(p: &PairFlags, io: &IoConfig) -> Result<(PathBuf, PathBuf), Failure> {
    Ok((
        required(p.left.clone(), &io.left, "left")?,
        required(p.right.clone(), &io.right, "right")?,
    ))
}
