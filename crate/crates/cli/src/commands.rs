use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sweepconf::imagery::{save_image, save_mask, save_preview};
use sweepconf::metrics::{evaluate, garg_crop, EvalCrop, EvalOptions};
use sweepconf::sweep::plane_file_name;
use sweepconf::synth::{preset, render, SceneSpec};
use sweepconf::*;

use crate::args::*;
use crate::config::{self, FileConfig};
use crate::Failure;

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|source| {
        Error::Io {
            path: dir.to_path_buf(),
            source,
        }
        .into()
    })
}

fn load_depth(path: &Path) -> Result<DepthMap, Failure> {
    Ok(load_map(path)?.map_values(f64::from))
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn valid_fraction<T: Copy>(m: &Map<T>) -> f64 {
    m.valid_count() as f64 / m.len() as f64
}

/// Prints `summary` as JSON, or as aligned `key value` lines.
fn report(summary: Value, json: bool) {
    if json {
        println!("{summary}");
        return;
    }
    let Value::Object(fields) = summary else {
        println!("{summary}");
        return;
    };
    for (k, v) in fields {
        match v {
            Value::Object(inner) => {
                for (ik, iv) in inner {
                    println!("{:<26} {}", format!("{k}.{ik}"), plain(&iv));
                }
            }
            other => println!("{k:<26} {}", plain(&other)),
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.6}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn pipeline(a: PipelineArgs, file: &FileConfig, json: bool) -> Result<(), Failure> {
    let matcher = config::matcher(&file.matcher, &a.matcher)?;
    let sweep = config::sweep(&file.sweep, &a.sweep)?;
    let calib = config::required(a.calib, &file.io.calib, "calib")?;
    let out = config::required(a.out, &file.io.out, "out")?;
    let (lp, rp) = config::pair(&a.pair, &file.io)?;
    let dump = a.dump_planes.or_else(|| file.io.dump_planes.clone());

    let total = Instant::now();
    let rig = load_calibration(&calib)?;
    let left = load_image(&lp)?;
    let right = load_image(&rp)?;
    let params = PipelineParams { matcher, sweep };
    let result = run_pipeline(&left, &right, &rig, &params)?;

    let t = Instant::now();
    create_dir(&out)?;
    let support = plane_support(&result.stack)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut put = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<(), Failure> {
        let p = out.join(name);
        f(&p)?;
        written.push(p);
        Ok(())
    };
    put("d0.pfm", &|p| save_map(result.reference(), p))?;
    put("U.pfm", &|p| save_map(&result.unreliability, p))?;
    put("W.pfm", &|p| save_map(&result.weights, p))?;
    put("pseudo_depth.pfm", &|p| save_map(&result.pseudo_depth.depth, p))?;
    put("plane_count.pfm", &|p| save_map(&support, p))?;
    if !a.no_previews {
        put("d0.pgm", &|p| save_preview(result.reference(), p))?;
        put("U.pgm", &|p| save_preview(&result.unreliability, p))?;
        put("W.pgm", &|p| save_preview(&result.weights, p))?;
        put("pseudo_depth.pgm", &|p| save_preview(&result.pseudo_depth.depth, p))?;
    }
    if !a.profile_at.is_empty() {
        let mut profiles = Vec::new();
        for &(x, y) in &a.profile_at {
            let entries = profile_at(&result.stack, x, y)?;
            profiles.push(json!({
                "x": x,
                "y": y,
                "reference": result.reference().get(x, y),
                "profile": entries.iter().map(|e| json!({"shift": e.shift, "compensated": e.compensated})).collect::<Vec<_>>(),
            }));
        }
        put("profiles.json", &|p| {
            std::fs::write(p, serde_json::to_string_pretty(&profiles).expect("json") + "\n").map_err(|source| {
                Error::Io {
                    path: p.to_path_buf(),
                    source,
                }
            })
        })?;
    }
    if let Some(dir) = &dump {
        result.stack.save(dir)?;
        written.extend(result.stack.shifts().into_iter().map(|k| dir.join(plane_file_name(k))));
    }
    let write = t.elapsed();

    let tm = result.timings;
    report(
        json!({
            "command": "pipeline",
            "width": left.width(),
            "height": left.height(),
            "shifts": result.stack.shifts(),
            "range_mode": format!("{:?}", params.sweep.range_mode).to_lowercase(),
            "mean_weight": result.mean_weight(),
            "valid_fraction": result.valid_fraction(),
            "depth_clamped": result.pseudo_depth.clamped,
            "timings_ms": {
                "sweep": ms(tm.sweep),
                "confidence": ms(tm.confidence),
                "triangulation": ms(tm.triangulation),
                "write": ms(write),
                "total": ms(total.elapsed()),
            },
            "artifacts": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        }),
        json,
    );
    Ok(())
}

pub fn match_cmd(a: MatchArgs, file: &FileConfig, json: bool) -> Result<(), Failure> {
    let matcher = config::matcher(&file.matcher, &a.matcher)?;
    let (lp, rp) = config::pair(&a.pair, &file.io)?;
    let t = Instant::now();
    let d = match_pair(&load_image(&lp)?, &load_image(&rp)?, &matcher)?;
    save_map(&d, &a.out)?;
    report(
        json!({
            "command": "match",
            "width": d.width(),
            "height": d.height(),
            "valid_fraction": valid_fraction(&d),
            "elapsed_ms": ms(t.elapsed()),
            "output": a.out.display().to_string(),
        }),
        json,
    );
    Ok(())
}

pub fn sweep(a: SweepArgs, file: &FileConfig, json: bool) -> Result<(), Failure> {
    let matcher = config::matcher(&file.matcher, &a.matcher)?;
    let sweep = config::sweep(&file.sweep, &a.sweep)?;
    let (lp, rp) = config::pair(&a.pair, &file.io)?;
    let t = Instant::now();
    let stack = run_sweep(&load_image(&lp)?, &load_image(&rp)?, &matcher, &sweep)?;
    stack.save(&a.out)?;
    report(
        json!({
            "command": "sweep",
            "shifts": stack.shifts(),
            "valid_fraction": stack.planes().iter().map(|p| valid_fraction(&p.disparity)).collect::<Vec<_>>(),
            "elapsed_ms": ms(t.elapsed()),
            "output": a.out.display().to_string(),
        }),
        json,
    );
    Ok(())
}

pub fn weight(a: WeightArgs, json: bool) -> Result<(), Failure> {
    let stack = SweepStack::load(&a.planes)?;
    let u = unreliability(&stack)?;
    let w = weight_map(&u, a.dmax)?;
    create_dir(&a.out)?;
    save_map(&u, a.out.join("U.pfm"))?;
    save_map(&w, a.out.join("W.pfm"))?;
    let scored: Vec<f64> = u.iter_valid().map(|(_, _, v)| v).collect();
    report(
        json!({
            "command": "weight",
            "shifts": stack.shifts(),
            "mean_weight": mean(w.values()),
            "mean_unreliability": mean(&scored),
            "scored_fraction": valid_fraction(&u),
        }),
        json,
    );
    Ok(())
}

pub fn depth(a: DepthArgs, json: bool) -> Result<(), Failure> {
    let rig = load_calibration(&a.calib)?;
    let t = disparity_to_depth(&load_map(&a.disparity)?, &rig)?;
    save_map(&t.depth, &a.out)?;
    report(
        json!({
            "command": "depth",
            "valid_fraction": valid_fraction(&t.depth),
            "clamped": t.clamped,
            "output": a.out.display().to_string(),
        }),
        json,
    );
    Ok(())
}

pub fn loss(a: LossArgs, json: bool) -> Result<(), Failure> {
    let student = load_depth(&a.student)?;
    let pseudo = load_depth(&a.pseudo)?;
    let weights = match &a.weights {
        Some(p) => load_depth(p)?,
        None => Map::filled(student.width(), student.height(), 1.0)?,
    };
    let r = weighted_depth_loss(&student, &pseudo, &weights)?;
    report(
        json!({
            "command": "loss",
            "loss": r.loss,
            "weight_sum": r.weight_sum,
            "pixels": r.pixels,
        }),
        json,
    );
    Ok(())
}

pub fn eval(a: EvalArgs, json: bool) -> Result<(), Failure> {
    let crop = match a.crop {
        CropKind::Garg => garg_crop(),
        CropKind::Full => EvalCrop::full(),
    };
    let opts = EvalOptions {
        clamp_gt: a.clamp_gt,
        median_scaling: a.median_scaling,
    };
    let r = evaluate(&load_depth(&a.pred)?, &load_depth(&a.gt)?, &crop, a.cap, opts)?;
    if json {
        println!("{}", serde_json::to_string(&r).expect("json"));
    } else {
        println!("{r}");
    }
    Ok(())
}

pub fn synth(a: SynthArgs, json: bool) -> Result<(), Failure> {
    let mut spec = match (&a.preset, &a.scene) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => SceneSpec::load(path)?,
        _ => return Err(Failure::Usage("give exactly one of --preset and --scene".into())),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let (left, right, gt) = render(&spec)?;
    create_dir(&a.out)?;
    let o = &a.out;
    save_image(&left, o.join("left.pgm"))?;
    save_image(&right, o.join("right.pgm"))?;
    save_map(&gt.disparity, o.join("gt_disp.pfm"))?;
    save_mask(&gt.occlusion_mask, o.join("occlusion.pgm"))?;
    save_mask(&gt.out_of_view, o.join("out_of_view.pgm"))?;
    save_mask(&gt.defects.textureless, o.join("textureless.pgm"))?;
    save_mask(&gt.defects.photometric, o.join("photometric.pgm"))?;
    save_mask(&gt.defects.swap_texture, o.join("swap_texture.pgm"))?;
    let count = |m: &Map<bool>| m.values().iter().filter(|&&v| v).count();
    report(
        json!({
            "command": "synth",
            "width": spec.width,
            "height": spec.height,
            "seed": spec.seed,
            "layers": spec.layers.len(),
            "occluded_pixels": count(&gt.occlusion_mask),
            "defect_pixels": count(&gt.defects.textureless) + count(&gt.defects.photometric) + count(&gt.defects.swap_texture),
            "output": o.display().to_string(),
        }),
        json,
    );
    Ok(())
}

pub fn profile(a: ProfileArgs, json: bool) -> Result<(), Failure> {
    let stack = SweepStack::load(&a.planes)?;
    let entries = profile_at(&stack, a.x, a.y)?;
    if json {
        let list: Vec<Value> = entries
            .iter()
            .map(|e| json!({"shift": e.shift, "compensated": e.compensated}))
            .collect();
        println!("{}", json!({"x": a.x, "y": a.y, "profile": list}));
    } else {
        println!("{:>6} {:>12}", "k", "d_k - k");
        for e in entries {
            match e.compensated {
                Some(v) => println!("{:>6} {v:>12.4}", e.shift),
                None => println!("{:>6} {:>12}", e.shift, "invalid"),
            }
        }
    }
    Ok(())
}
