use rayon::prelude::*;

use super::{aggregate, CostVolume, DisparityMap, MatcherConfig};
use crate::error::Result;
use crate::imagery::Map;

struct Pick {
    index: usize,
    cost: f32,
    second: Option<f32>,
}

/// Lowest-cost candidate (ties go to the smallest disparity) and the best
/// cost among the remaining candidates.
fn pick(costs: &[f32]) -> Option<Pick> {
    let mut best: Option<(usize, f32)> = None;
    for (i, &c) in costs.iter().enumerate() {
        if c == CostVolume::UNMATCHED {
            continue;
        }
        if best.is_none_or(|(_, b)| c < b) {
            best = Some((i, c));
        }
    }
    let (index, cost) = best?;
    let second = costs
        .iter()
        .enumerate()
        .filter(|&(i, &c)| i != index && c != CostVolume::UNMATCHED)
        .map(|(_, &c)| c)
        .reduce(f32::min);
    Some(Pick { index, cost, second })
}

/// Vertex offset of the parabola through `(−1, before)`, `(0, centre)`,
/// `(+1, after)`, clamped to `[-0.5, 0.5]`. Flat or inverted fits give 0.
pub(crate) fn parabola_offset(before: f32, centre: f32, after: f32) -> f32 {
    let denom = before - 2.0 * centre + after;
    if denom <= 0.0 || !denom.is_finite() {
        return 0.0;
    }
    ((before - after) / (2.0 * denom)).clamp(-0.5, 0.5)
}

/// Selects a disparity per pixel from the cost volume.
///
/// Costs are first box-aggregated when `cfg.aggregation_radius > 0`. A pixel
/// is invalid when it has no matched candidate, when the uniqueness test
/// fails (runner-up cost `<= ratio * best`), or when the left-right check
/// disagrees by more than the threshold.
pub fn winner_take_all(cv: &CostVolume, cfg: &MatcherConfig) -> Result<DisparityMap> {
    let owned;
    let cv = if cfg.aggregation_radius > 0 {
        owned = aggregate(cv, cfg.aggregation_radius);
        &owned
    } else {
        cv
    };
    let (w, h) = (cv.width(), cv.height());
    let nd = cv.num_disparities();
    let d_lo = cv.d_lo();

    let mut values = vec![0f32; w * h];
    let mut valid = vec![false; w * h];
    values
        .par_chunks_mut(w)
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (vrow, okrow))| {
            let costs = cv.row(y);
            for x in 0..w {
                let px = &costs[x * nd..(x + 1) * nd];
                let Some(p) = pick(px) else { continue };
                if let (Some(ratio), Some(second)) = (cfg.uniqueness_ratio, p.second) {
                    if second <= ratio * p.cost {
                        continue;
                    }
                }
                let mut d = (d_lo + p.index as i32) as f32;
                if cfg.subpixel && p.index > 0 && p.index + 1 < nd {
                    let (a, b) = (px[p.index - 1], px[p.index + 1]);
                    if a != CostVolume::UNMATCHED && b != CostVolume::UNMATCHED {
                        d += parabola_offset(a, p.cost, b);
                    }
                }
                vrow[x] = d;
                okrow[x] = true;
            }

            if let Some(threshold) = cfg.lr_check_threshold {
                // right-referenced disparity, negative by convention
                let right: Vec<Option<f32>> = (0..w)
                    .map(|xr| {
                        let mut best: Option<(i32, f32)> = None;
                        for di in 0..nd {
                            let d = d_lo + di as i32;
                            let xl = xr as i64 + d as i64;
                            if xl < 0 || xl >= w as i64 {
                                continue;
                            }
                            let c = costs[xl as usize * nd + di];
                            if c != CostVolume::UNMATCHED && best.is_none_or(|(_, b)| c < b) {
                                best = Some((d, c));
                            }
                        }
                        best.map(|(d, _)| -(d as f32))
                    })
                    .collect();
                for x in 0..w {
                    if !okrow[x] {
                        continue;
                    }
                    let xr = x as i64 - vrow[x].round() as i64;
                    let keep = (0..w as i64).contains(&xr)
                        && right[xr as usize].is_some_and(|dr| (vrow[x] + dr).abs() <= threshold);
                    if !keep {
                        okrow[x] = false;
                    }
                }
            }
            for x in 0..w {
                if !okrow[x] {
                    vrow[x] = 0.0;
                }
            }
        });
    Map::from_parts(w, h, values, valid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::CostKind;

    fn plain() -> MatcherConfig {
        MatcherConfig {
            cost: CostKind::Census,
            window_radius: 1,
            d_lo: 0,
            d_hi: 7,
            aggregation_radius: 0,
            subpixel: false,
            lr_check_threshold: None,
            uniqueness_ratio: None,
        }
    }

    fn single(costs: Vec<f32>, d_lo: i32) -> CostVolume {
        let d_hi = d_lo + costs.len() as i32 - 1;
        CostVolume::from_costs(1, 1, d_lo, d_hi, costs).unwrap()
    }

    #[test]
    fn unique_minimum_wins() {
        let mut costs = vec![1.0; 8];
        costs[3] = 0.0;
        let d = winner_take_all(&single(costs, 0), &plain()).unwrap();
        assert_eq!(d.get(0, 0), Some(3.0));
    }

    #[test]
    fn ties_go_to_smallest_disparity() {
        let d = winner_take_all(&single(vec![2.0, 1.0, 1.0, 1.0], -2), &plain()).unwrap();
        assert_eq!(d.get(0, 0), Some(-1.0));
    }

    #[test]
    fn symmetric_parabola_keeps_integer() {
        let cfg = MatcherConfig { subpixel: true, ..plain() };
        let mut costs = vec![2.0; 8];
        costs[4] = 1.0;
        costs[5] = 0.0;
        costs[6] = 1.0;
        let d = winner_take_all(&single(costs, 0), &cfg).unwrap();
        assert_eq!(d.get(0, 0), Some(5.0));
    }

    #[test]
    fn asymmetric_parabola_offset() {
        // Oracle: dense grid search over the quadratic interpolating the three
        // samples; its minimiser must agree with the closed-form vertex.
        let samples = [(-1.0f64, 1.0f64), (0.0, 0.0), (1.0, 0.5)];
        let fit = |t: f64| {
            samples
                .iter()
                .enumerate()
                .map(|(i, &(xi, yi))| {
                    let basis: f64 = samples
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &(xj, _))| (t - xj) / (xi - xj))
                        .product();
                    yi * basis
                })
                .sum::<f64>()
        };
        let oracle = (0..=100_000)
            .map(|i| -1.0 + 2.0 * i as f64 / 100_000.0)
            .min_by(|a, b| fit(*a).partial_cmp(&fit(*b)).unwrap())
            .unwrap();
        assert!((oracle - 1.0 / 6.0).abs() < 1e-4);

        let cfg = MatcherConfig { subpixel: true, ..plain() };
        let mut costs = vec![2.0; 8];
        costs[4] = 1.0;
        costs[5] = 0.0;
        costs[6] = 0.5;
        let d = winner_take_all(&single(costs, 0), &cfg).unwrap().get(0, 0).unwrap();
        assert!((d as f64 - (5.0 + oracle)).abs() < 1e-4, "{d}");
        assert!((d - 5.1666665).abs() < 1e-6);
    }

    #[test]
    fn parabola_edge_cases() {
        assert_eq!(parabola_offset(1.0, 1.0, 1.0), 0.0);
        assert_eq!(parabola_offset(0.0, 1.0, 0.0), 0.0);
        assert!((parabola_offset(10.0, 0.0, 0.1) - 9.9 / 20.2).abs() < 1e-6);
        assert_eq!(parabola_offset(100.0, 0.0, 0.0), 0.5);
    }

    #[test]
    fn minimum_at_range_end_not_refined() {
        let cfg = MatcherConfig { subpixel: true, ..plain() };
        let mut costs = vec![1.0; 8];
        costs[7] = 0.0;
        let d = winner_take_all(&single(costs, 0), &cfg).unwrap();
        assert_eq!(d.get(0, 0), Some(7.0));
    }

    #[test]
    fn all_unmatched_is_invalid() {
        let d = winner_take_all(&single(vec![CostVolume::UNMATCHED; 4], 0), &plain()).unwrap();
        assert_eq!(d.get(0, 0), None);
    }

    #[test]
    fn uniqueness_rejects_flat_costs() {
        let cfg = MatcherConfig { uniqueness_ratio: Some(1.0), ..plain() };
        let d = winner_take_all(&single(vec![0.0; 4], 0), &cfg).unwrap();
        assert_eq!(d.get(0, 0), None);
        let cfg = MatcherConfig { uniqueness_ratio: Some(1.5), ..plain() };
        let d = winner_take_all(&single(vec![3.0, 2.0, 2.9], 0), &cfg).unwrap();
        assert_eq!(d.get(0, 0), None);
        let d = winner_take_all(&single(vec![3.1, 2.0, 3.5], 0), &cfg).unwrap();
        assert_eq!(d.get(0, 0), Some(1.0));
    }

    #[test]
    fn lr_check_flags_inconsistent_pixel() {
        // 4x1 image, disparities {0, 1}. Left pixel 2 prefers d=1 (right 1);
        // right pixel 1 prefers d=0 (left pixel 1) so pixel 2 fails.
        let u = CostVolume::UNMATCHED;
        #[rustfmt::skip]
        let costs = vec![
            0.0, u,    // x=0
            0.0, 5.0,  // x=1
            3.0, 1.0,  // x=2
            0.0, 4.0,  // x=3
        ];
        let cv = CostVolume::from_costs(4, 1, 0, 1, costs).unwrap();
        let cfg = MatcherConfig { d_hi: 1, lr_check_threshold: Some(0.5), ..plain() };
        let d = winner_take_all(&cv, &cfg).unwrap();
        assert_eq!(d.get(0, 0), Some(0.0));
        assert_eq!(d.get(1, 0), Some(0.0));
        assert_eq!(d.get(2, 0), None);
        assert_eq!(d.get(3, 0), Some(0.0));
        let loose = MatcherConfig { lr_check_threshold: Some(1.0), ..cfg };
        assert_eq!(winner_take_all(&cv, &loose).unwrap().get(2, 0), Some(1.0));
    }
}
