use std::path::Path;
use std::process::{Command, Output};

use sweepconf::{load_map, SweepStack};

const SCENE: &str = r#"
width = 128
height = 48
seed = 17
[[layers]]
region = { x = 0, y = 0, width = 128, height = 48 }
disparity = 6
texture = { kind = "noise", scale = 1.0 }
[[layers]]
region = { x = 60, y = 10, width = 30, height = 24 }
disparity = 14
texture = { kind = "noise", scale = 1.0 }
"#;

fn sweepconf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sweepconf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Renders the small scene into `dir` and writes a calibration file.
fn setup(dir: &Path) {
    std::fs::write(dir.join("scene.toml"), SCENE).unwrap();
    std::fs::write(dir.join("calib.txt"), "f=720\nB=0.54\n").unwrap();
    ok(&sweepconf(dir, &["synth", "--scene", "scene.toml", "--out", "scene"]));
}

const PAIR: [&str; 4] = ["--left", "scene/left.pgm", "--right", "scene/right.pgm"];
const SMALL: [&str; 4] = ["--dmax", "24", "--sweep-k", "4"];

#[test]
fn synth_writes_images_truth_and_masks() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&sweepconf(tmp.path(), &["synth", "--preset", "occlusion", "--out", "s"]));
    for f in [
        "left.pgm",
        "right.pgm",
        "gt_disp.pfm",
        "occlusion.pgm",
        "textureless.pgm",
        "photometric.pgm",
        "swap_texture.pgm",
    ] {
        assert!(tmp.path().join("s").join(f).is_file(), "{f}");
    }
    let gt = load_map(tmp.path().join("s/gt_disp.pfm")).unwrap();
    assert_eq!((gt.width(), gt.height()), (512, 256));
    assert_eq!(gt.value(250, 100), 20.0);
    let out = sweepconf(tmp.path(), &["synth", "--preset", "nope", "--out", "s"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pipeline_smoke_writes_five_maps() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    let mut args = vec!["pipeline", "--calib", "calib.txt", "--out", "out"];
    args.extend(PAIR);
    args.extend(SMALL);
    let out = sweepconf(dir, &args);
    ok(&out);
    for f in ["d0.pfm", "U.pfm", "W.pfm", "pseudo_depth.pfm", "plane_count.pfm"] {
        let m = load_map(dir.join("out").join(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        assert_eq!((m.width(), m.height()), (128, 48), "{f}");
    }
    let w = load_map(dir.join("out/W.pfm")).unwrap();
    assert!(w.values().iter().all(|v| (0.0..=1.0).contains(v)));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("mean_weight") && stdout.contains("timings_ms.sweep"), "{stdout}");
}

#[test]
fn missing_calibration_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    let mut args = vec!["pipeline", "--calib", "missing.txt", "--out", "out"];
    args.extend(PAIR);
    let out = sweepconf(dir, &args);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr), "error: calibration: missing.txt: not found\n");
}

#[test]
fn dump_planes_uses_signed_names() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    let mut args = vec!["pipeline", "--calib", "calib.txt", "--out", "out", "--dump-planes", "planes"];
    args.extend(PAIR);
    args.extend(["--dmax", "24"]);
    ok(&sweepconf(dir, &args));
    let mut names: Vec<String> = std::fs::read_dir(dir.join("planes"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["plane_k+00.pfm", "plane_k+08.pfm", "plane_k+16.pfm", "plane_k-08.pfm", "plane_k-16.pfm"]
    );
    assert_eq!(SweepStack::load(dir.join("planes")).unwrap().shifts(), vec![-16, -8, 0, 8, 16]);
}

#[test]
fn pipeline_output_is_reproducible_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    for (threads, out) in [("1", "a"), ("3", "b"), ("1", "c")] {
        let mut args = vec!["--threads", threads, "pipeline", "--calib", "calib.txt", "--out", out];
        args.extend(PAIR);
        args.extend(SMALL);
        ok(&sweepconf(dir, &args));
    }
    for f in ["d0.pfm", "U.pfm", "W.pfm", "pseudo_depth.pfm", "plane_count.pfm", "W.pgm"] {
        let a = std::fs::read(dir.join("a").join(f)).unwrap();
        assert_eq!(a, std::fs::read(dir.join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a, std::fs::read(dir.join("c").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    std::fs::write(
        dir.join("run.toml"),
        "[matcher]\nd_hi = 24\n[sweep]\nmax_shift = 4\nplanes = 4\n[io]\nleft = \"scene/left.pgm\"\nright = \"scene/right.pgm\"\n",
    )
    .unwrap();
    let out = sweepconf(dir, &["--config", "run.toml", "sweep", "--out", "p"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    ok(&sweepconf(dir, &["--config", "run.toml", "--json", "sweep", "--out", "p", "--sweep-n", "3"]));
    assert_eq!(SweepStack::load(dir.join("p")).unwrap().shifts(), vec![-4, 0, 4]);

    std::fs::write(dir.join("bad.toml"), "[matcher]\nwindow = 3\n").unwrap();
    let out = sweepconf(dir, &["--config", "bad.toml", "sweep", "--out", "p"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);
}

#[test]
fn module_subcommands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    let mut args = vec!["sweep", "--out", "planes", "--lr-check", "off", "--range-mode", "shifted"];
    args.extend(PAIR);
    args.extend(SMALL);
    ok(&sweepconf(dir, &args));
    ok(&sweepconf(dir, &["weight", "--planes", "planes", "--out", "w", "--dmax", "24"]));
    ok(&sweepconf(dir, &["depth", "--disparity", "planes/plane_k+00.pfm", "--calib", "calib.txt", "--out", "d.pfm"]));
    ok(&sweepconf(dir, &["depth", "--disparity", "scene/gt_disp.pfm", "--calib", "calib.txt", "--out", "gt.pfm"]));

    let out = sweepconf(dir, &["--json", "loss", "--student", "gt.pfm", "--pseudo", "d.pfm", "--weights", "w/W.pfm"]);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["loss"].as_f64().unwrap() >= 0.0 && v["pixels"].as_u64().unwrap() > 1000);

    let out = sweepconf(dir, &["--json", "eval", "--pred", "d.pfm", "--gt", "gt.pfm", "--crop", "full", "--clamp-gt=false"]);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["delta1"].as_f64().unwrap() > 0.9, "{v}");

    let out = sweepconf(dir, &["--json", "profile", "--planes", "planes", "--x", "40", "--y", "24"]);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["profile"].as_array().unwrap().len(), 5);

    let out = sweepconf(dir, &["profile", "--planes", "planes", "--x", "400", "--y", "24"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_weights_fail_the_loss() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let m = sweepconf::Map::filled(4, 2, 5.0f32).unwrap();
    sweepconf::save_map(&m, dir.join("d.pfm")).unwrap();
    sweepconf::save_map(&sweepconf::Map::filled(4, 2, 0.0f32).unwrap(), dir.join("w.pfm")).unwrap();
    let out = sweepconf(dir, &["loss", "--student", "d.pfm", "--pseudo", "d.pfm", "--weights", "w.pfm"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: degenerate weights"));
    ok(&sweepconf(dir, &["loss", "--student", "d.pfm", "--pseudo", "d.pfm"]));
}
