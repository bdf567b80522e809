use sweepconf::synth::*;
use sweepconf::*;

fn stddev(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

#[test]
fn rendering_is_reproducible() {
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap();
        let (l1, r1, g1) = render(&spec).unwrap();
        let (l2, r2, g2) = render(&spec).unwrap();
        let b = |m: &Image| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(b(&l1), b(&l2));
        assert_eq!(b(&r1), b(&r2));
        assert_eq!(g1, g2);
    }
}

#[test]
fn correspondence_is_exact_away_from_defects() {
    for name in PRESET_NAMES {
        let (left, right, gt) = render(&preset(name).unwrap()).unwrap();
        let mut checked = 0;
        for y in 0..left.height() {
            for x in 0..left.width() {
                let d = gt.disparity.value(x, y) as usize;
                let defect = gt.defects.textureless.value(x, y)
                    || gt.defects.photometric.value(x, y)
                    || gt.defects.swap_texture.value(x, y);
                if defect || gt.occlusion_mask.value(x, y) || gt.out_of_view.value(x, y) {
                    continue;
                }
                assert_eq!(right.value(x - d, y).to_bits(), left.value(x, y).to_bits(), "{name} ({x},{y})");
                checked += 1;
            }
        }
        assert!(checked > 100_000, "{name}: {checked}");
    }
}

#[test]
fn occlusion_band_equals_disparity_gap() {
    let (_, _, gt) = render(&preset("occlusion").unwrap()).unwrap();
    // foreground spans x in [192, 320), y in [64, 192) at d = 20 over d = 4
    for y in 0..256 {
        let band: Vec<usize> = (0..512).filter(|&x| gt.occlusion_mask.value(x, y)).collect();
        if (64..192).contains(&y) {
            assert_eq!(band, (176..192).collect::<Vec<_>>(), "row {y}");
        } else {
            assert!(band.is_empty(), "row {y}");
        }
    }
}

#[test]
fn clean_scene_obeys_the_sweep_rule() {
    let (left, right, gt) = render(&preset("clean").unwrap()).unwrap();
    let params = PipelineParams {
        sweep: SweepConfig {
            range_mode: RangeMode::Shifted,
            ..Default::default()
        },
        ..Default::default()
    };
    let rig = CalibratedRig::new(720.0, 0.54, 80.0).unwrap();
    let out = run_pipeline(&left, &right, &rig, &params).unwrap();
    for plane in plane_consistency(&out.stack, OracleOptions::default().margin) {
        assert!(plane.within_half >= 0.99, "{plane:?}");
        assert!(plane.mean_abs <= 0.5, "{plane:?}");
    }
    let report = oracle_check(&out.stack, &out.weights, &gt, &OracleOptions::default()).unwrap();
    assert!(report.accuracy.within_half >= 0.99, "{report:?}");
    assert!(report.clean.mean_weight.unwrap() >= 0.9, "{report:?}");
}

#[test]
fn fixed_range_cannot_follow_a_large_negative_shift() {
    let mut spec = preset("clean").unwrap();
    spec.width = 192;
    spec.height = 64;
    spec.layers[0].region = Rect::full(192, 64);
    let (left, right, _) = render(&spec).unwrap();
    let stack = run_sweep(&left, &right, &MatcherConfig::default(), &SweepConfig::default()).unwrap();
    let by_shift = plane_consistency(&stack, 24);
    let worst = by_shift.iter().find(|p| p.shift == -16).unwrap();
    assert!(worst.pixels == 0 || worst.within_half < 0.5, "{worst:?}");
    let fine = by_shift.iter().find(|p| p.shift == 8).unwrap();
    assert!(fine.within_half >= 0.99, "{fine:?}");
}

#[test]
fn textureless_profile_wanders() {
    let (left, right, _) = render(&preset("textureless").unwrap()).unwrap();
    let matcher = MatcherConfig {
        lr_check_threshold: None,
        uniqueness_ratio: None,
        ..Default::default()
    };
    let stack = run_sweep(&left, &right, &matcher, &SweepConfig::default()).unwrap();
    // centre of the 64x64 patch at (224, 96)
    let profile = profile_at(&stack, 256, 128).unwrap();
    let comp: Vec<f64> = profile.iter().filter_map(|e| e.compensated).collect();
    assert!(comp.len() >= 2, "{profile:?}");
    assert!(stddev(&comp) > 1.0, "{profile:?}");

    // k = -16 would need d = -4, outside the fixed [0, 64] range
    let textured = profile_at(&stack, 100, 40).unwrap();
    let comp: Vec<f64> = textured
        .iter()
        .filter(|e| e.shift != -16)
        .filter_map(|e| e.compensated)
        .collect();
    assert!(comp.len() == 4 && stddev(&comp) < 1e-4, "{textured:?}");
}
