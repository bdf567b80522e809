//! Deterministic synthetic stereo scenes with exact ground truth.
//!
//! A scene is a stack of fronto-parallel layers, each a textured rectangle at
//! an integer disparity. Later layers are drawn over earlier ones. The first
//! layer must cover the whole frame and acts as an unbounded backdrop, so the
//! right image never shows a hole. Textures are attached to the surface:
//! a layer point at surface column `u` appears at `x = u` in the left image
//! and at `x = u - d` in the right image.

pub mod rng;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::confidence::WeightMap;
use crate::error::{Error, Result};
use crate::imagery::{Image, Map};
use crate::matcher::DisparityMap;
use crate::sweep::SweepStack;

use rng::{hash_words, unit_f32};

/// Intensity written over textureless defect regions.
pub const TEXTURELESS_LEVEL: f32 = 0.5;

const SALT_TEXTURE: u64 = 0x7465_7874;
const SALT_SWAP: u64 = 0x7377_6170;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self { x, y, width, height }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self::new(0, 0, width, height)
    }

    /// Accepts any column, including ones outside the frame.
    pub fn contains(&self, u: i64, y: usize) -> bool {
        u >= self.x as i64 && u < (self.x + self.width) as i64 && y >= self.y && y < self.y + self.height
    }

    fn fits(&self, width: usize, height: usize) -> bool {
        self.width > 0 && self.height > 0 && self.x + self.width <= width && self.y + self.height <= height
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Texture {
    /// Value noise on a lattice of `scale` pixels; `scale = 1` is i.i.d. per pixel.
    Noise { scale: f64 },
    Constant { value: f32 },
    /// Triangle wave along x.
    Stripes { period: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub region: Rect,
    pub disparity: u32,
    pub texture: Texture,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DefectKind {
    Textureless,
    /// `right = clamp(gain * value + bias, 0, 1)`, right image only.
    Photometric { gain: f32, bias: f32 },
    /// Right image shows an independent texture draw.
    SwapTexture,
}

/// A defect region is given in left-image coordinates and applies to
/// whichever surface is visible there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub region: Rect,
    #[serde(flatten)]
    pub kind: DefectKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub defects: Vec<Defect>,
}

impl SceneSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::config(format!("scene: {}", e.message())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.width, self.height);
        if w == 0 || h == 0 {
            return Err(Error::arg(format!("scene must be non-empty, got {w}x{h}")));
        }
        let first = self.layers.first().ok_or_else(|| Error::arg("scene has no layers"))?;
        if first.region != Rect::full(w, h) {
            return Err(Error::arg("first layer must cover the whole frame"));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if !layer.region.fits(w, h) {
                return Err(Error::arg(format!("layer {i} region {:?} outside {w}x{h}", layer.region)));
            }
            if layer.disparity as usize > w / 4 {
                return Err(Error::arg(format!(
                    "layer {i} disparity {} exceeds width / 4 = {}",
                    layer.disparity,
                    w / 4
                )));
            }
            match layer.texture {
                Texture::Noise { scale } if !(scale >= 1.0 && scale.is_finite()) => {
                    return Err(Error::arg(format!("layer {i} noise scale must be >= 1, got {scale}")));
                }
                Texture::Constant { value } if !(0.0..=1.0).contains(&value) => {
                    return Err(Error::arg(format!("layer {i} constant {value} outside [0, 1]")));
                }
                Texture::Stripes { period } if period < 2 => {
                    return Err(Error::arg(format!("layer {i} stripe period must be >= 2")));
                }
                _ => {}
            }
        }
        for (i, defect) in self.defects.iter().enumerate() {
            if !defect.region.fits(w, h) {
                return Err(Error::arg(format!("defect {i} region {:?} outside {w}x{h}", defect.region)));
            }
            if let DefectKind::Photometric { gain, bias } = defect.kind {
                if !(gain > 0.0 && gain.is_finite() && bias.is_finite()) {
                    return Err(Error::arg(format!("defect {i} needs positive gain and finite bias")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

fn lattice(seed: u64, layer: usize, salt: u64, u: i64, y: i64) -> f32 {
    unit_f32(hash_words(&[seed, layer as u64, salt, u as u64, y as u64]))
}

fn texture_value(texture: &Texture, seed: u64, layer: usize, salt: u64, u: i64, y: usize) -> f32 {
    match *texture {
        Texture::Constant { value } => value,
        Texture::Stripes { period } => {
            let p = period as i64;
            let phase = u.rem_euclid(p) as f32 / p as f32;
            1.0 - (2.0 * phase - 1.0).abs()
        }
        Texture::Noise { scale } if scale <= 1.0 => lattice(seed, layer, salt, u, y as i64),
        Texture::Noise { scale } => {
            let (fu, fy) = (u as f64 / scale, y as f64 / scale);
            let (u0, y0) = (fu.floor(), fy.floor());
            let (tu, ty) = (fu - u0, fy - y0);
            let (u0, y0) = (u0 as i64, y0 as i64);
            let at = |du: i64, dy: i64| lattice(seed, layer, salt, u0 + du, y0 + dy) as f64;
            let top = at(0, 0) * (1.0 - tu) + at(1, 0) * tu;
            let bottom = at(0, 1) * (1.0 - tu) + at(1, 1) * tu;
            (top * (1.0 - ty) + bottom * ty) as f32
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectMasks {
    pub textureless: Map<bool>,
    pub photometric: Map<bool>,
    pub swap_texture: Map<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    /// Disparity of the visible layer at every left pixel.
    pub disparity: DisparityMap,
    /// Visible in the left image, hidden by a nearer layer in the right one.
    pub occlusion_mask: Map<bool>,
    /// Visible in the left image, but its match falls outside the right image.
    pub out_of_view: Map<bool>,
    pub defects: DefectMasks,
}

struct Scene<'a> {
    spec: &'a SceneSpec,
}

impl<'a> Scene<'a> {
    fn top_layer(&self, side: Side, x: usize, y: usize) -> usize {
        let layers = &self.spec.layers;
        (1..layers.len())
            .rev()
            .find(|&l| {
                let u = match side {
                    Side::Left => x as i64,
                    Side::Right => x as i64 + layers[l].disparity as i64,
                };
                layers[l].region.contains(u, y)
            })
            .unwrap_or(0)
    }

    fn surface(&self, side: Side, layer: usize, u: i64, y: usize) -> f32 {
        let spec = self.spec;
        let mut v = texture_value(&spec.layers[layer].texture, spec.seed, layer, SALT_TEXTURE, u, y);
        for defect in spec.defects.iter().filter(|d| d.region.contains(u, y)) {
            match (defect.kind, side) {
                (DefectKind::Textureless, _) => v = TEXTURELESS_LEVEL,
                (DefectKind::Photometric { gain, bias }, Side::Right) => v = (gain * v + bias).clamp(0.0, 1.0),
                (DefectKind::SwapTexture, Side::Right) => {
                    v = texture_value(&spec.layers[layer].texture, spec.seed, layer, SALT_SWAP, u, y)
                }
                _ => {}
            }
        }
        v
    }

    fn pixel(&self, side: Side, x: usize, y: usize) -> f32 {
        let l = self.top_layer(side, x, y);
        let u = match side {
            Side::Left => x as i64,
            Side::Right => x as i64 + self.spec.layers[l].disparity as i64,
        };
        self.surface(side, l, u, y)
    }
}

/// Renders the left and right images and their exact ground truth.
pub fn render(spec: &SceneSpec) -> Result<(Image, Image, GroundTruth)> {
    spec.validate()?;
    let scene = Scene { spec };
    let (w, h) = (spec.width, spec.height);
    let draw = |side: Side| -> Result<Image> {
        let values = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| scene.pixel(side, x, y))
            .collect();
        Map::from_values(w, h, values)
    };
    let left = draw(Side::Left)?;
    let right = draw(Side::Right)?;

    let mut disparity = Map::filled(w, h, 0.0f32)?;
    let mut occlusion_mask = Map::filled(w, h, false)?;
    let mut out_of_view = Map::filled(w, h, false)?;
    for y in 0..h {
        for x in 0..w {
            let l = scene.top_layer(Side::Left, x, y);
            let d = spec.layers[l].disparity as usize;
            disparity.set(x, y, d as f32);
            if x < d {
                out_of_view.set(x, y, true);
            } else if scene.top_layer(Side::Right, x - d, y) != l {
                occlusion_mask.set(x, y, true);
            }
        }
    }
    let mask_of = |pick: fn(&DefectKind) -> bool| -> Result<Map<bool>> {
        let mut m = Map::filled(w, h, false)?;
        for defect in spec.defects.iter().filter(|d| pick(&d.kind)) {
            let r = defect.region;
            for y in r.y..r.y + r.height {
                for x in r.x..r.x + r.width {
                    m.set(x, y, true);
                }
            }
        }
        Ok(m)
    };
    let defects = DefectMasks {
        textureless: mask_of(|k| matches!(k, DefectKind::Textureless))?,
        photometric: mask_of(|k| matches!(k, DefectKind::Photometric { .. }))?,
        swap_texture: mask_of(|k| matches!(k, DefectKind::SwapTexture))?,
    };
    Ok((
        left,
        right,
        GroundTruth {
            disparity,
            occlusion_mask,
            out_of_view,
            defects,
        },
    ))
}

pub const PRESET_NAMES: [&str; 4] = ["clean", "textureless", "occlusion", "reflective"];

pub const PRESET_WIDTH: usize = 512;
pub const PRESET_HEIGHT: usize = 256;

/// Gain and bias of the reflective preset's right-image highlight. Census
/// ignores a pure gain, so the bias saturates part of the patch.
pub const REFLECTIVE_GAIN: f32 = 1.4;
pub const REFLECTIVE_BIAS: f32 = 0.4;
/// The reflective patch is a smooth surface (value noise on an 8 px lattice).
pub const REFLECTIVE_TEXTURE_SCALE: f64 = 8.0;

/// Built-in scenes, 512 wide by 256 high.
pub fn preset(name: &str) -> Result<SceneSpec> {
    let (w, h) = (PRESET_WIDTH, PRESET_HEIGHT);
    let noise = Texture::Noise { scale: 1.0 };
    let backdrop = |disparity| Layer {
        region: Rect::full(w, h),
        disparity,
        texture: noise,
    };
    let spec = match name {
        "clean" => SceneSpec {
            width: w,
            height: h,
            seed: 1,
            layers: vec![backdrop(12)],
            defects: vec![],
        },
        "textureless" => SceneSpec {
            width: w,
            height: h,
            seed: 2,
            layers: vec![backdrop(12)],
            defects: vec![Defect {
                region: Rect::new(224, 96, 64, 64),
                kind: DefectKind::Textureless,
            }],
        },
        "occlusion" => SceneSpec {
            width: w,
            height: h,
            seed: 3,
            layers: vec![
                backdrop(4),
                Layer {
                    region: Rect::new(192, 64, 128, 128),
                    disparity: 20,
                    texture: noise,
                },
            ],
            defects: vec![],
        },
        "reflective" => SceneSpec {
            width: w,
            height: h,
            seed: 4,
            layers: vec![
                backdrop(12),
                Layer {
                    region: Rect::new(192, 64, 128, 128),
                    disparity: 12,
                    texture: Texture::Noise {
                        scale: REFLECTIVE_TEXTURE_SCALE,
                    },
                },
            ],
            defects: vec![Defect {
                region: Rect::new(192, 64, 128, 128),
                kind: DefectKind::Photometric {
                    gain: REFLECTIVE_GAIN,
                    bias: REFLECTIVE_BIAS,
                },
            }],
        },
        other => {
            return Err(Error::arg(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionClass {
    Clean,
    Textureless,
    Occlusion,
    Photometric,
}

impl RegionClass {
    pub const ALL: [RegionClass; 4] = [
        RegionClass::Clean,
        RegionClass::Textureless,
        RegionClass::Occlusion,
        RegionClass::Photometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegionClass::Clean => "clean",
            RegionClass::Textureless => "textureless",
            RegionClass::Occlusion => "occlusion",
            RegionClass::Photometric => "photometric",
        }
    }
}

/// How pixels are assigned to region classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    /// Pixels this close to the image border belong to no class.
    pub margin: usize,
    /// Clean pixels must be at least this far from any defect, occlusion or
    /// disparity edge.
    pub halo: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { margin: 24, halo: 6 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accuracy {
    /// Clean pixels scored.
    pub pixels: usize,
    /// Fractions of scored pixels whose reference disparity is valid and
    /// within 0.5, 1 and 3 px of the truth.
    pub within_half: f64,
    pub within_one: f64,
    pub within_three: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassStats {
    pub pixels: usize,
    /// `None` when the class is empty.
    pub mean_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub accuracy: Accuracy,
    pub clean: ClassStats,
    pub textureless: ClassStats,
    pub occlusion: ClassStats,
    pub photometric: ClassStats,
}

impl OracleReport {
    pub fn stats(&self, class: RegionClass) -> ClassStats {
        match class {
            RegionClass::Clean => self.clean,
            RegionClass::Textureless => self.textureless,
            RegionClass::Occlusion => self.occlusion,
            RegionClass::Photometric => self.photometric,
        }
    }

    /// `mean_W(clean) / mean_W(class)`; infinite when the class mean is 0.
    pub fn separation(&self, class: RegionClass) -> Option<f64> {
        let clean = self.clean.mean_weight?;
        let other = self.stats(class).mean_weight?;
        Some(if other == 0.0 { f64::INFINITY } else { clean / other })
    }
}

/// Marks every pixel within `radius` (Chebyshev distance) of a set pixel.
fn dilate(mask: &Map<bool>, radius: usize) -> Map<bool> {
    let (w, h) = (mask.width(), mask.height());
    let span = |i: usize, n: usize| i.saturating_sub(radius)..(i + radius + 1).min(n);
    let mut rows = mask.clone();
    for y in 0..h {
        for x in 0..w {
            rows.set(x, y, span(x, w).any(|i| mask.value(i, y)));
        }
    }
    let mut out = rows.clone();
    for y in 0..h {
        for x in 0..w {
            out.set(x, y, span(y, h).any(|j| rows.value(x, j)));
        }
    }
    out
}

/// Masks of each region class, restricted to the interior.
pub fn region_masks(gt: &GroundTruth, opts: &OracleOptions) -> Result<[Map<bool>; 4]> {
    let d = &gt.disparity;
    let (w, h) = (d.width(), d.height());
    let interior = |x: usize, y: usize| {
        x >= opts.margin && y >= opts.margin && x + opts.margin < w && y + opts.margin < h
    };
    let mut bad = Map::filled(w, h, false)?;
    for y in 0..h {
        for x in 0..w {
            let edge = (x + 1 < w && d.value(x + 1, y) != d.value(x, y))
                || (y + 1 < h && d.value(x, y + 1) != d.value(x, y))
                || (x > 0 && d.value(x - 1, y) != d.value(x, y))
                || (y > 0 && d.value(x, y - 1) != d.value(x, y));
            let flagged = edge
                || gt.occlusion_mask.value(x, y)
                || gt.out_of_view.value(x, y)
                || gt.defects.textureless.value(x, y)
                || gt.defects.photometric.value(x, y)
                || gt.defects.swap_texture.value(x, y);
            bad.set(x, y, flagged);
        }
    }
    let near_bad = dilate(&bad, opts.halo);
    let class = |f: &dyn Fn(usize, usize) -> bool| -> Result<Map<bool>> {
        let values = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| interior(x, y) && f(x, y))
            .collect();
        Map::from_values(w, h, values)
    };
    Ok([
        class(&|x, y| !near_bad.value(x, y))?,
        class(&|x, y| gt.defects.textureless.value(x, y))?,
        class(&|x, y| gt.occlusion_mask.value(x, y))?,
        class(&|x, y| gt.defects.photometric.value(x, y) || gt.defects.swap_texture.value(x, y))?,
    ])
}

/// Scores a sweep against the scene's ground truth.
pub fn oracle_check(
    stack: &SweepStack,
    weights: &WeightMap,
    gt: &GroundTruth,
    opts: &OracleOptions,
) -> Result<OracleReport> {
    if !stack.reference().same_shape(&gt.disparity) || !weights.same_shape(&gt.disparity) {
        return Err(Error::arg("sweep, weights and ground truth differ in dimensions"));
    }
    let masks = region_masks(gt, opts)?;
    let stats = |mask: &Map<bool>| {
        let (mut n, mut sum) = (0usize, 0.0f64);
        for (x, y) in mask.domain() {
            if mask.value(x, y) {
                n += 1;
                sum += weights.value(x, y);
            }
        }
        ClassStats {
            pixels: n,
            mean_weight: (n > 0).then(|| sum / n as f64),
        }
    };

    let reference = stack.reference();
    let mut hits = [0usize; 3];
    let mut pixels = 0usize;
    for (x, y) in masks[0].domain() {
        if !masks[0].value(x, y) {
            continue;
        }
        pixels += 1;
        if let Some(d) = reference.get(x, y) {
            let err = (d - gt.disparity.value(x, y)).abs();
            for (hit, tol) in hits.iter_mut().zip([0.5, 1.0, 3.0]) {
                if err <= tol {
                    *hit += 1;
                }
            }
        }
    }
    let frac = |k: usize| if pixels == 0 { 0.0 } else { k as f64 / pixels as f64 };
    Ok(OracleReport {
        accuracy: Accuracy {
            pixels,
            within_half: frac(hits[0]),
            within_one: frac(hits[1]),
            within_three: frac(hits[2]),
        },
        clean: stats(&masks[0]),
        textureless: stats(&masks[1]),
        occlusion: stats(&masks[2]),
        photometric: stats(&masks[3]),
    })
}

/// Agreement of one sweep plane with the reference after compensation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneConsistency {
    pub shift: i32,
    /// Interior pixels valid in both this plane and the reference.
    pub pixels: usize,
    /// Fraction of those with `|d_k - k - d_0| <= 0.5`.
    pub within_half: f64,
    pub mean_abs: f64,
}

/// Checks `d_k - k = d_0` on every plane, over pixels at least `margin`
/// from the border.
pub fn plane_consistency(stack: &SweepStack, margin: usize) -> Vec<PlaneConsistency> {
    let reference = stack.reference();
    let (w, h) = (stack.width(), stack.height());
    stack
        .planes()
        .iter()
        .map(|plane| {
            let (mut n, mut hits, mut sum) = (0usize, 0usize, 0.0f64);
            for y in margin..h.saturating_sub(margin) {
                for x in margin..w.saturating_sub(margin) {
                    let (Some(d0), Some(dk)) = (reference.get(x, y), plane.disparity.get(x, y)) else {
                        continue;
                    };
                    let err = (dk as f64 - plane.shift as f64 - d0 as f64).abs();
                    n += 1;
                    sum += err;
                    if err <= 0.5 {
                        hits += 1;
                    }
                }
            }
            PlaneConsistency {
                shift: plane.shift,
                pixels: n,
                within_half: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
                mean_abs: if n == 0 { 0.0 } else { sum / n as f64 },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(d: u32) -> SceneSpec {
        SceneSpec {
            width: 64,
            height: 16,
            seed: 9,
            layers: vec![Layer {
                region: Rect::full(64, 16),
                disparity: d,
                texture: Texture::Noise { scale: 1.0 },
            }],
            defects: vec![],
        }
    }

    #[test]
    fn single_layer_truth() {
        let (left, right, gt) = render(&single(12)).unwrap();
        assert!(gt.disparity.values().iter().all(|&d| d == 12.0));
        assert!(gt.occlusion_mask.values().iter().all(|&m| !m));
        assert_eq!(gt.out_of_view.values().iter().filter(|&&m| m).count(), 12 * 16);
        for y in 0..16 {
            for x in 12..64 {
                assert_eq!(right.value(x - 12, y).to_bits(), left.value(x, y).to_bits());
            }
        }
    }

    #[test]
    fn spec_violations() {
        let mut s = single(17);
        assert!(matches!(render(&s), Err(Error::InvalidArgument(_))));
        s = single(4);
        s.layers[0].region = Rect::new(1, 0, 63, 16);
        assert!(render(&s).is_err());
        s = single(4);
        s.layers.push(Layer {
            region: Rect::new(60, 0, 8, 4),
            disparity: 4,
            texture: Texture::Constant { value: 0.2 },
        });
        assert!(render(&s).is_err());
        s = single(4);
        s.layers[0].texture = Texture::Noise { scale: 0.5 };
        assert!(render(&s).is_err());
        s = single(4);
        s.defects.push(Defect {
            region: Rect::new(0, 0, 8, 8),
            kind: DefectKind::Photometric { gain: 0.0, bias: 0.0 },
        });
        assert!(render(&s).is_err());
        s.layers.clear();
        assert!(render(&s).is_err());
    }

    #[test]
    fn textures_in_range() {
        for texture in [
            Texture::Noise { scale: 1.0 },
            Texture::Noise { scale: 3.5 },
            Texture::Stripes { period: 6 },
            Texture::Constant { value: 0.25 },
        ] {
            let mut s = single(4);
            s.layers[0].texture = texture;
            let (left, right, _) = render(&s).unwrap();
            for v in left.values().iter().chain(right.values()) {
                assert!((0.0..=1.0).contains(v), "{texture:?} gave {v}");
            }
        }
    }

    #[test]
    fn stripes_are_periodic() {
        let t = Texture::Stripes { period: 4 };
        let v: Vec<f32> = (0..8).map(|u| texture_value(&t, 0, 0, 0, u, 0)).collect();
        assert_eq!(v, vec![0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn defects_change_only_their_side() {
        let mut s = single(8);
        s.defects.push(Defect {
            region: Rect::new(20, 4, 10, 6),
            kind: DefectKind::Textureless,
        });
        s.defects.push(Defect {
            region: Rect::new(40, 4, 10, 6),
            kind: DefectKind::Photometric { gain: 1.4, bias: 0.1 },
        });
        let (clean_left, clean_right, _) = render(&single(8)).unwrap();
        let (left, right, gt) = render(&s).unwrap();
        assert_eq!(left.value(25, 5), TEXTURELESS_LEVEL);
        assert_eq!(right.value(25 - 8, 5), TEXTURELESS_LEVEL);
        assert_eq!(left.value(45, 5), clean_left.value(45, 5));
        let expect = (1.4 * clean_right.value(45 - 8, 5) + 0.1).clamp(0.0, 1.0);
        assert_eq!(right.value(45 - 8, 5), expect);
        assert!(gt.defects.textureless.value(20, 4) && !gt.defects.textureless.value(30, 4));
        assert!(gt.defects.photometric.value(49, 9));
        assert!(gt.defects.swap_texture.values().iter().all(|&m| !m));
    }

    #[test]
    fn swap_texture_is_independent() {
        let mut s = single(8);
        s.defects.push(Defect {
            region: Rect::new(20, 0, 20, 16),
            kind: DefectKind::SwapTexture,
        });
        let (left, right, _) = render(&s).unwrap();
        let differing = (0..16)
            .flat_map(|y| (20..40).map(move |x| (x, y)))
            .filter(|&(x, y)| left.value(x, y) != right.value(x - 8, y))
            .count();
        assert!(differing > 300, "{differing}");
    }

    #[test]
    fn occluding_layer_geometry() {
        let s = SceneSpec {
            width: 128,
            height: 32,
            seed: 5,
            layers: vec![
                Layer {
                    region: Rect::full(128, 32),
                    disparity: 4,
                    texture: Texture::Noise { scale: 1.0 },
                },
                Layer {
                    region: Rect::new(60, 8, 30, 16),
                    disparity: 20,
                    texture: Texture::Noise { scale: 1.0 },
                },
            ],
            defects: vec![],
        };
        let (left, right, gt) = render(&s).unwrap();
        for y in 8..24 {
            let band: Vec<usize> = (0..128).filter(|&x| gt.occlusion_mask.value(x, y)).collect();
            assert_eq!(band, (44..60).collect::<Vec<_>>());
        }
        assert_eq!(gt.disparity.value(60, 8), 20.0);
        assert_eq!(gt.disparity.value(59, 8), 4.0);
        assert_eq!(right.value(70 - 20, 10), left.value(70, 10));
    }

    #[test]
    fn presets_render() {
        for name in PRESET_NAMES {
            let spec = preset(name).unwrap();
            assert_eq!((spec.width, spec.height), (512, 256));
            render(&spec).unwrap();
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn toml_scene() {
        let text = r#"
            width = 64
            height = 16
            seed = 3
            [[layers]]
            region = { x = 0, y = 0, width = 64, height = 16 }
            disparity = 6
            texture = { kind = "noise", scale = 2.0 }
            [[layers]]
            region = { x = 10, y = 2, width = 8, height = 8 }
            disparity = 10
            texture = { kind = "stripes", period = 5 }
            [[defects]]
            kind = "photometric"
            gain = 1.4
            bias = 0.0
            region = { x = 30, y = 2, width = 8, height = 8 }
            [[defects]]
            kind = "textureless"
            region = { x = 40, y = 2, width = 4, height = 4 }
        "#;
        let spec = SceneSpec::parse(text).unwrap();
        assert_eq!(spec.layers.len(), 2);
        assert_eq!(spec.defects[0].kind, DefectKind::Photometric { gain: 1.4, bias: 0.0 });
        assert_eq!(spec.defects[1].kind, DefectKind::Textureless);
        assert!(matches!(SceneSpec::parse("width = 1"), Err(Error::Config(_))));
    }

    #[test]
    fn dilation() {
        let mut m = Map::filled(7, 5, false).unwrap();
        m.set(3, 2, true);
        let d = dilate(&m, 1);
        assert_eq!(d.values().iter().filter(|&&v| v).count(), 9);
        assert!(d.value(2, 1) && d.value(4, 3) && !d.value(5, 2));
    }
}
