use rayon::prelude::*;

use super::{CostKind, MatcherConfig};
use crate::error::{Error, Result};
use crate::imagery::Image;

/// Matching costs `cost(x, y, d)` for every integer `d` in `[d_lo, d_hi]`.
///
/// Layout is `[y][x][d]`. Entries whose windows leave the image or touch an
/// invalid pixel hold [`CostVolume::UNMATCHED`] and never win.
#[derive(Clone, Debug, PartialEq)]
pub struct CostVolume {
    width: usize,
    height: usize,
    d_lo: i32,
    d_hi: i32,
    costs: Vec<f32>,
}

impl CostVolume {
    pub const UNMATCHED: f32 = f32::INFINITY;

    /// Wraps precomputed costs laid out `[y][x][d]`.
    pub fn from_costs(width: usize, height: usize, d_lo: i32, d_hi: i32, costs: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || d_lo > d_hi {
            return Err(Error::arg("empty cost volume"));
        }
        let nd = (d_hi - d_lo + 1) as usize;
        if costs.len() != width * height * nd {
            return Err(Error::arg(format!(
                "cost volume {width}x{height}x{nd} needs {} entries, got {}",
                width * height * nd,
                costs.len()
            )));
        }
        if costs.iter().any(|c| c.is_nan()) {
            return Err(Error::arg("NaN matching cost"));
        }
        Ok(Self {
            width,
            height,
            d_lo,
            d_hi,
            costs,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn d_lo(&self) -> i32 {
        self.d_lo
    }

    pub fn d_hi(&self) -> i32 {
        self.d_hi
    }

    pub fn num_disparities(&self) -> usize {
        (self.d_hi - self.d_lo + 1) as usize
    }

    /// All candidate costs at one pixel, indexed by `d - d_lo`.
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let nd = self.num_disparities();
        let i = (y * self.width + x) * nd;
        &self.costs[i..i + nd]
    }

    pub(crate) fn row(&self, y: usize) -> &[f32] {
        let len = self.width * self.num_disparities();
        &self.costs[y * len..(y + 1) * len]
    }

    /// Cost of disparity `d` at `(x, y)`, `None` if unmatched or out of range.
    pub fn cost(&self, x: usize, y: usize, d: i32) -> Option<f32> {
        if d < self.d_lo || d > self.d_hi || x >= self.width || y >= self.height {
            return None;
        }
        let c = self.pixel(x, y)[(d - self.d_lo) as usize];
        (c != Self::UNMATCHED).then_some(c)
    }

    pub fn costs(&self) -> &[f32] {
        &self.costs
    }
}

/// `true` where the `(2r+1)^2` window centred on the pixel is inside the
/// image and fully valid.
fn window_ok(img: &Image, r: usize) -> Vec<bool> {
    let (w, h) = (img.width(), img.height());
    let mask = img.valid_mask();
    let mut ok = vec![false; w * h];
    if w < 2 * r + 1 || h < 2 * r + 1 {
        return ok;
    }
    for y in r..h - r {
        // invalid pixels per column over the window rows
        let col_bad: Vec<u32> = (0..w)
            .map(|x| (y - r..=y + r).filter(|&yy| !mask[yy * w + x]).count() as u32)
            .collect();
        for x in r..w - r {
            ok[y * w + x] = col_bad[x - r..=x + r].iter().all(|&c| c == 0);
        }
    }
    ok
}

/// Census descriptors: bit set where the neighbour is darker than the centre.
struct Census {
    words: usize,
    bits: Vec<u64>,
    ok: Vec<bool>,
}

impl Census {
    fn new(img: &Image, r: usize) -> Self {
        let (w, h) = (img.width(), img.height());
        let side = 2 * r + 1;
        let words = (side * side - 1).div_ceil(64);
        let ok = window_ok(img, r);
        let mut bits = vec![0u64; w * h * words];
        let vals = img.values();
        bits.par_chunks_mut(w * words).enumerate().for_each(|(y, row)| {
            for x in 0..w {
                if !ok[y * w + x] {
                    continue;
                }
                let centre = vals[y * w + x];
                let desc = &mut row[x * words..(x + 1) * words];
                let mut b = 0usize;
                for yy in y - r..=y + r {
                    for xx in x - r..=x + r {
                        if yy == y && xx == x {
                            continue;
                        }
                        if vals[yy * w + xx] < centre {
                            desc[b / 64] |= 1u64 << (b % 64);
                        }
                        b += 1;
                    }
                }
            }
        });
        Self { words, bits, ok }
    }

    fn descriptor(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }
}

/// Builds the raw (unaggregated) cost volume of `left` against `right`.
pub fn compute_cost_volume(left: &Image, right: &Image, cfg: &MatcherConfig) -> Result<CostVolume> {
    cfg.validate()?;
    if !left.same_shape(right) {
        return Err(Error::arg(format!(
            "left is {}x{} but right is {}x{}",
            left.width(),
            left.height(),
            right.width(),
            right.height()
        )));
    }
    let (w, h) = (left.width(), left.height());
    let reach = cfg.d_lo.unsigned_abs().max(cfg.d_hi.unsigned_abs()) as usize;
    if reach >= w {
        return Err(Error::arg(format!(
            "disparity range [{}, {}] does not fit width {w}",
            cfg.d_lo, cfg.d_hi
        )));
    }
    let nd = cfg.num_disparities();
    let mut costs = vec![CostVolume::UNMATCHED; w * h * nd];
    let r = cfg.window_radius;

    match cfg.cost {
        CostKind::Census => {
            let cl = Census::new(left, r);
            let cr = Census::new(right, r);
            costs.par_chunks_mut(w * nd).enumerate().for_each(|(y, row)| {
                for x in 0..w {
                    let il = y * w + x;
                    if !cl.ok[il] {
                        continue;
                    }
                    let dl = cl.descriptor(il);
                    for (di, slot) in row[x * nd..(x + 1) * nd].iter_mut().enumerate() {
                        let xr = x as i64 - (cfg.d_lo as i64 + di as i64);
                        if xr < 0 || xr >= w as i64 {
                            continue;
                        }
                        let ir = y * w + xr as usize;
                        if !cr.ok[ir] {
                            continue;
                        }
                        let ham: u32 = dl
                            .iter()
                            .zip(cr.descriptor(ir))
                            .map(|(a, b)| (a ^ b).count_ones())
                            .sum();
                        *slot = ham as f32;
                    }
                }
            });
        }
        CostKind::Sad => {
            let okl = window_ok(left, r);
            let okr = window_ok(right, r);
            let (lv, rv) = (left.values(), right.values());
            let area = ((2 * r + 1) * (2 * r + 1)) as f64;
            costs.par_chunks_mut(w * nd).enumerate().for_each(|(y, row)| {
                if y < r || y + r >= h {
                    return;
                }
                let mut colsum = vec![0f64; w];
                for di in 0..nd {
                    let d = cfg.d_lo as i64 + di as i64;
                    // vertical sums of |L(x) - R(x - d)| over the window rows
                    for (x, cs) in colsum.iter_mut().enumerate() {
                        let xr = x as i64 - d;
                        *cs = if xr < 0 || xr >= w as i64 {
                            f64::NAN
                        } else {
                            (y - r..=y + r)
                                .map(|yy| (lv[yy * w + x] as f64 - rv[yy * w + xr as usize] as f64).abs())
                                .sum()
                        };
                    }
                    for x in r..w.saturating_sub(r) {
                        let xr = x as i64 - d;
                        if xr < 0 || xr >= w as i64 || !okl[y * w + x] || !okr[y * w + xr as usize] {
                            continue;
                        }
                        let s: f64 = colsum[x - r..=x + r].iter().sum();
                        row[x * nd + di] = (s / area) as f32;
                    }
                }
            });
        }
    }

    Ok(CostVolume {
        width: w,
        height: h,
        d_lo: cfg.d_lo,
        d_hi: cfg.d_hi,
        costs,
    })
}

/// Box-filters every cost slice with a `(2r+1)^2` window, averaging only
/// matched entries. Unmatched entries stay unmatched.
pub fn aggregate(cv: &CostVolume, radius: usize) -> CostVolume {
    if radius == 0 {
        return cv.clone();
    }
    let (w, h, nd) = (cv.width, cv.height, cv.num_disparities());
    let row_len = w * nd;
    let mut hsum = vec![0f32; w * h * nd];
    let mut hcnt = vec![0u16; w * h * nd];
    hsum.par_chunks_mut(row_len)
        .zip(hcnt.par_chunks_mut(row_len))
        .enumerate()
        .for_each(|(y, (srow, crow))| {
            let src = cv.row(y);
            for x in 0..w {
                let lo = x.saturating_sub(radius);
                let hi = (x + radius).min(w - 1);
                for di in 0..nd {
                    let mut s = 0f32;
                    let mut c = 0u16;
                    for xx in lo..=hi {
                        let v = src[xx * nd + di];
                        if v != CostVolume::UNMATCHED {
                            s += v;
                            c += 1;
                        }
                    }
                    srow[x * nd + di] = s;
                    crow[x * nd + di] = c;
                }
            }
        });
    let mut out = vec![CostVolume::UNMATCHED; w * h * nd];
    out.par_chunks_mut(row_len).enumerate().for_each(|(y, orow)| {
        let src = cv.row(y);
        let lo = y.saturating_sub(radius);
        let hi = (y + radius).min(h - 1);
        for i in 0..row_len {
            if src[i] == CostVolume::UNMATCHED {
                continue;
            }
            let mut s = 0f32;
            let mut c = 0u32;
            for yy in lo..=hi {
                s += hsum[yy * row_len + i];
                c += hcnt[yy * row_len + i] as u32;
            }
            orow[i] = s / c as f32;
        }
    });
    CostVolume {
        width: w,
        height: h,
        d_lo: cv.d_lo,
        d_hi: cv.d_hi,
        costs: out,
    }
}
