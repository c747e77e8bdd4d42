use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use radar_egoseg::commands::{build_map, cmd_gt_label, Context};
use radar_egoseg::config::RunConfig;
use radar_egoseg::dataset::{Dataset, Sequence};
use radar_egoseg::eval::{write_predictions, FramePrediction};
use radar_egoseg::labels::instance_lifespans;
use radar_egoseg::sim::{simulate_sequence, PointOrigin, SceneConfig};
use radar_egoseg::{EgoMotionState, Error, GroundTruthLabels, PointClass, RadarExtrinsics, RadarFrame, RadarPoint};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radar-egoseg"))
        .args(args)
        .env("RADAR_EGOSEG_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cli(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = cli(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: [&str; 4] = ["--set", "sequences=2", "--set", "scene.duration=6"];

#[test]
fn simulate_is_deterministic_and_counts_frames() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&[&["--seed", "1", "--out", p(out), "--jobs", "2"], &SMALL[..], &["simulate"]].concat());
    }
    for name in ["manifest.json", "seq_000.jsonl", "seq_001.jsonl", "config.toml"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let ds = Dataset::load(&a).unwrap();
    assert_eq!(ds.seed, Some(1));
    assert_eq!(ds.config_hash.as_ref().unwrap().len(), 64);
    let rate = SceneConfig::default().frame_rate;
    assert_eq!(ds.sequences[0].frames.len(), (6.0 * rate) as usize);

    // a different seed changes the data
    let c = dir.path().join("c");
    ok(&[&["--seed", "2", "--out", p(&c)], &SMALL[..], &["simulate"]].concat());
    assert_ne!(fs::read(a.join("seq_000.jsonl")).unwrap(), fs::read(c.join("seq_000.jsonl")).unwrap());
}

#[test]
fn config_file_and_override_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 5\nsequences = 1\n[scene]\nduration = 3.0\nframe_rate = 10.0\n").unwrap();
    let out = dir.path().join("d");
    ok(&["--config", p(&cfg), "--set", "scene.duration=4", "--out", p(&out), "simulate"]);
    let ds = Dataset::load(&out).unwrap();
    assert_eq!((ds.seed, ds.sequences.len(), ds.sequences[0].frames.len()), (Some(5), 1, 40));
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert!(fails(&["--set", "scene.duration=-1", "--out", p(&out), "simulate"]).contains("duration"));
    assert!(fails(&["--set", "scene.colour=3", "--out", p(&out), "simulate"]).contains("colour"));
    assert!(fails(&["--set", "solver.sigma=0", "--out", p(&out), "simulate"]).contains("solver.sigma"));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn gt_label_reproduces_simulator_labels() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&[&["--seed", "4", "--out", p(&data)], &SMALL[..], &["simulate"]].concat());
    // keep only the instance annotations
    let mut ds = Dataset::load(&data).unwrap();
    let original = ds.clone();
    for f in ds.sequences.iter_mut().flat_map(|s| &mut s.frames) {
        f.gt.as_mut().unwrap().class.fill(PointClass::FalsePositive);
    }
    let stripped = dir.path().join("stripped");
    ds.save(&stripped).unwrap();
    let out = dir.path().join("relabeled");
    ok(&[&["--out", p(&out), "--jobs", "2"], &SMALL[..], &["gt-label", "--data", p(&stripped)]].concat());
    assert_eq!(Dataset::load(&out).unwrap().sequences, original.sequences);
}

#[test]
fn gt_label_needs_odometry() {
    let dir = tempfile::tempdir().unwrap();
    let seq = simulate_sequence(&SceneConfig { duration: 2.0, ..SceneConfig::default() }, 1).unwrap();
    let mut frames = seq.frames.clone();
    let odom: Vec<EgoMotionState> = frames.iter().map(|f| f.odom.unwrap()).collect();
    for f in &mut frames {
        f.odom = None;
    }
    let data = dir.path().join("data");
    Dataset::new(vec![Sequence::new("s", frames.clone(), seq.extrinsics)]).save(&data).unwrap();
    let err = fails(&["--out", p(&dir.path().join("o")), "gt-label", "--data", p(&data)]);
    assert!(err.contains("odometry"), "{err}");

    // the same data with an external odometry file
    let odir = dir.path().join("odom");
    fs::create_dir_all(&odir).unwrap();
    let mut csv = String::from("t,speed,yaw_rate\n");
    for (f, o) in frames.iter().zip(&odom) {
        csv.push_str(&format!("{},{},{}\n", f.timestamp, o.speed, o.yaw_rate));
    }
    fs::write(odir.join("s.csv"), csv).unwrap();
    let out = dir.path().join("o");
    ok(&["--out", p(&out), "gt-label", "--data", p(&data), "--odometry", p(&odir)]);
    let relabeled = Dataset::load(&out).unwrap();
    assert_eq!(relabeled.sequences[0].frames, seq.frames);
}

#[test]
fn short_lived_instance_is_not_moving() {
    let extr = RadarExtrinsics::default();
    let ego = EgoMotionState::new(10.0, 0.0);
    let motion = radar_egoseg::ego::vehicle_to_radar(ego, &extr);
    let frames: Vec<RadarFrame> = (0..8)
        .map(|k| {
            let a = 0.2;
            let vr = radar_egoseg::ego::static_radial_velocity(a, motion);
            let mut points = vec![RadarPoint::new(20.0, a, vr), RadarPoint::new(15.0, -0.3, vr + 4.0)];
            let mut inst = vec![None, Some(1)];
            if k < 3 {
                points.push(RadarPoint::new(30.0, 0.5, vr - 5.0));
                inst.push(Some(2));
            }
            let mut f = RadarFrame::new(k as f64 * 0.06, points);
            f.odom = Some(ego);
            f.gt = Some(GroundTruthLabels {
                class: vec![PointClass::FalsePositive; inst.len()],
                instance: inst,
            });
            f
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    Dataset::new(vec![Sequence::new("s", frames, extr)]).save(&data).unwrap();
    let ctx = Context::new(RunConfig::default(), dir.path().join("out"));
    cmd_gt_label(&ctx, &data, None).unwrap();
    let out = Dataset::load(dir.path().join("out")).unwrap();
    let spans = instance_lifespans(&out.sequences[0].frames);
    assert_eq!(spans.get(&1), Some(&8));
    assert!(!spans.contains_key(&2));
    let gt0 = out.sequences[0].frames[0].gt.clone().unwrap();
    assert_eq!(gt0.class, vec![PointClass::Static, PointClass::Moving, PointClass::FalsePositive]);
}

#[test]
fn train_infer_eval_map_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = |s: &str| dir.path().join(s);
    let cfg = d("run.toml");
    fs::write(
        &cfg,
        "seed = 3\nsequences = 3\n[scene]\nduration = 4.0\n\
         [model]\nencoder = [8, 8, 8]\ngru_hidden = 8\ndecoder = [8, 8, 8]\nhead = [4, 4, 1]\nwindow = 3\n\
         [train]\nmax_epochs = 3\nbatch_size = 16\n",
    )
    .unwrap();
    let c = p(&cfg);
    ok(&["--config", c, "--out", p(&d("data")), "simulate"]);
    ok(&["--config", c, "--out", p(&d("train")), "train", "--data", p(&d("data"))]);
    let log = fs::read_to_string(d("train/train_log.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "epoch,loss,lr");
    assert_eq!(lines.len(), 4);
    let model = d("train/model.bin");
    ok(&["--config", c, "--out", p(&d("pred")), "--jobs", "3", "infer", "--data", p(&d("data")), "--model", p(&model)]);
    let first = fs::read_to_string(d("pred/seq_000.jsonl")).unwrap();
    assert!(first.lines().next().unwrap().starts_with("{\"v\":1,"));
    let stdout = ok(&["--config", c, "--out", p(&d("eval")), "eval", "--data", p(&d("data")), "--predictions", p(&d("pred"))]);
    assert!(stdout.contains("F1"));
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(d("eval/metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["per_sequence"].as_array().unwrap().len(), 3);
    ok(&["--config", c, "--out", p(&d("map")), "map", "--data", p(&d("data")), "--predictions", p(&d("pred"))]);
    assert!(fs::read_to_string(d("map/seq_002_map.svg")).unwrap().contains("<svg"));
    assert!(fs::read_to_string(d("map/seq_000_trajectory.csv")).unwrap().starts_with("t,gt_x,gt_y"));

    // identical reruns give identical models
    ok(&["--config", c, "--out", p(&d("train2")), "train", "--data", p(&d("data"))]);
    assert_eq!(fs::read(&model).unwrap(), fs::read(d("train2/model.bin")).unwrap());

    // a model file from a future version is rejected
    let mut bytes = fs::read(&model).unwrap();
    bytes[4] = 9;
    fs::write(d("bad.bin"), bytes).unwrap();
    let err = fails(&["--config", c, "--out", p(&d("x")), "infer", "--data", p(&d("data")), "--model", p(&d("bad.bin"))]);
    assert!(err.contains("version"), "{err}");
}

#[test]
fn eval_of_ground_truth_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["--seed", "6", "--set", "sequences=2", "--set", "scene.duration=12", "--out", p(&data), "simulate"]);
    let ds = Dataset::load(&data).unwrap();
    let pred = dir.path().join("pred");
    fs::create_dir_all(&pred).unwrap();
    for s in &ds.sequences {
        let preds: Vec<FramePrediction> = s.frames.iter().filter_map(FramePrediction::from_ground_truth).collect();
        write_predictions(pred.join(format!("{}.jsonl", s.name)), &preds).unwrap();
    }
    let out = dir.path().join("eval");
    ok(&["--out", p(&out), "eval", "--data", p(&data), "--predictions", p(&pred)]);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["f1"], 1.0);
    assert_eq!(m["iou"], 1.0);
    assert_eq!(m["rte_50_m"], 0.0);
    assert_eq!(m["s_rmse_vx_cm_s"], 0.0);

    // frames without ground truth cannot be scored
    let mut stripped = ds.clone();
    stripped.sequences[1].frames[5].gt = None;
    let bad = dir.path().join("nogt");
    stripped.save(&bad).unwrap();
    let err = fails(&["--out", p(&out), "eval", "--data", p(&bad), "--predictions", p(&pred)]);
    assert!(err.contains("ground-truth"), "{err}");
}

#[test]
fn map_with_true_motion_stacks_landmarks() {
    let scene = SceneConfig {
        duration: 15.0,
        noise_range: 0.0,
        noise_azimuth: 0.0,
        noise_radial_velocity: 0.0,
        ..SceneConfig::default()
    };
    let sim = simulate_sequence(&scene, 12).unwrap();
    let seq = Sequence::new("s", sim.frames.clone(), sim.extrinsics);
    let map = build_map(&seq, None).unwrap();

    let mut by_landmark: HashMap<usize, Vec<[f64; 2]>> = HashMap::new();
    let mut k = 0;
    for (f, origins) in sim.frames.iter().zip(&sim.origins) {
        for (c, o) in f.gt.as_ref().unwrap().class.iter().zip(origins) {
            if *c == PointClass::Static {
                if let PointOrigin::Landmark(id) = o {
                    by_landmark.entry(*id).or_default().push(map.points[k].1);
                }
                k += 1;
            }
        }
    }
    assert_eq!(k, map.points.len());
    let mut worst: f64 = 0.0;
    let mut stacked = 0;
    for pts in by_landmark.values().filter(|p| p.len() > 1) {
        stacked += 1;
        for q in pts {
            worst = worst.max(((q[0] - pts[0][0]).powi(2) + (q[1] - pts[0][1]).powi(2)).sqrt());
        }
    }
    assert!(stacked > 10);
    assert!(worst < 1e-6, "landmark spread {worst:e} m");
    // the estimate is the truth here
    assert_eq!(map.gt, map.estimated);
}

#[test]
fn library_errors_surface() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = Context::new(RunConfig::default(), dir.path().join("o"));
    assert!(matches!(cmd_gt_label(&ctx, &dir.path().join("missing"), None), Err(Error::Io { .. })));
}
