//! The operator commands behind the `radar-egoseg` binary.
//!
//! Every command reads and writes the file formats of [`crate::io`],
//! [`crate::dataset`], [`crate::network::file`] and [`crate::eval`], and is
//! deterministic given its inputs and the configuration seed. Per-sequence
//! work runs on up to `jobs` threads; results are merged in sequence order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dataset::{write_json, Dataset, Manifest, Sequence};
use crate::error::{Error, Result};
use crate::eval::{aggregate, evaluate_sequence, read_predictions, write_predictions, EvalReport, FramePrediction};
use crate::labels::{apply_lifespan_filter, generate_gt_labels};
use crate::network::{infer_sequence, load_model, save_model, train, TrainLog};
use crate::point::{EgoMotionState, PointClass, RadarFrame};
use crate::sim::{sequence_seed, simulate_sequence};
use crate::svg::{self, Series};
use crate::trajectory::{integrate_trajectory, radar_point_to_world, Pose2};

pub const MODEL_FILE: &str = "model.bin";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const METRICS_FILE: &str = "metrics.json";
/// Timestamp tolerance when matching external odometry rows to frames.
pub const ODOMETRY_TIME_TOLERANCE: f64 = 1e-6;

/// Shared command settings.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub jobs: usize,
}

impl Context {
    pub fn new(config: RunConfig, out: impl Into<PathBuf>) -> Self {
        Self {
            config,
            out: out.into(),
            jobs: 1,
        }
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    fn create_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))
    }
}

/// Maps `f` over `items` on up to `jobs` scoped threads, keeping input order.
pub fn par_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let f = &f;
    let mut parts: Vec<(usize, R)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|k| {
                s.spawn(move || {
                    (k..items.len())
                        .step_by(jobs)
                        .map(|i| (i, f(i, &items[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    parts.sort_by_key(|(i, _)| *i);
    parts.into_iter().map(|(_, r)| r).collect()
}

/// Simulates `config.sequences` sequences into `ctx.out`.
pub fn cmd_simulate(ctx: &Context) -> Result<Manifest> {
    let cfg = &ctx.config;
    cfg.scene.validate()?;
    let indices: Vec<usize> = (0..cfg.sequences).collect();
    let sims = par_map(&indices, ctx.jobs, |_, &i| simulate_sequence(&cfg.scene, sequence_seed(cfg.seed, i)));
    let mut sequences = Vec::with_capacity(sims.len());
    for (i, sim) in sims.into_iter().enumerate() {
        let sim = sim?;
        sequences.push(Sequence::new(format!("seq_{i:03}"), sim.frames, sim.extrinsics));
    }
    let mut ds = Dataset::new(sequences);
    ds.seed = Some(cfg.seed);
    ds.config_hash = Some(cfg.hash());
    let manifest = ds.save(&ctx.out)?;
    fs::write(ctx.out.join("config.toml"), cfg.to_toml()).map_err(|e| Error::io(ctx.out.join("config.toml"), e))?;
    log::info!("wrote {} sequences to {}", manifest.sequences.len(), ctx.out.display());
    Ok(manifest)
}

/// One row of an external odometry file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdometryRow {
    pub t: f64,
    pub speed: f64,
    pub yaw_rate: f64,
}

/// Reads `t,speed,yaw_rate` CSV rows.
pub fn read_odometry_csv(path: &Path) -> Result<Vec<OdometryRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    rdr.deserialize().map(|r| r.map_err(|e| csv_error(path, e))).collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            context: path.display().to_string(),
            message: format!("{other:?}"),
        },
    }
}

/// Relabels one sequence.
///
/// Odometry comes from `external` when a row matches the frame timestamp,
/// otherwise from the frame itself. Instance annotations are the `inst`
/// column of any existing ground truth; the classes are recomputed.
pub fn relabel_sequence(
    frames: &[RadarFrame],
    external: Option<&[OdometryRow]>,
    extr: &crate::point::RadarExtrinsics,
    residual_threshold: f64,
    min_lifespan: usize,
) -> Result<Vec<RadarFrame>> {
    let mut out = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let ext = external.and_then(|rows| {
            let k = rows.partition_point(|r| r.t < frame.timestamp - ODOMETRY_TIME_TOLERANCE);
            rows.get(k)
                .filter(|r| (r.t - frame.timestamp).abs() <= ODOMETRY_TIME_TOLERANCE)
                .map(|r| EgoMotionState::new(r.speed, r.yaw_rate))
        });
        let odom = ext.or(frame.odom).ok_or(Error::MissingOdometry { frame: i })?;
        let annotations = match &frame.gt {
            Some(gt) if gt.instance.len() == frame.len() => gt.instance.clone(),
            Some(gt) => {
                return Err(Error::LengthMismatch {
                    left: frame.len(),
                    right: gt.instance.len(),
                })
            }
            None => vec![None; frame.len()],
        };
        let mut f = frame.clone();
        f.odom = Some(odom);
        f.gt = Some(generate_gt_labels(&frame.points, odom, extr, residual_threshold, &annotations));
        out.push(f);
    }
    Ok(apply_lifespan_filter(out, min_lifespan))
}

/// Relabels every sequence of `data`. `odometry` is a directory of
/// `<sequence>.csv` files; sequences without one use frame odometry.
pub fn cmd_gt_label(ctx: &Context, data: &Path, odometry: Option<&Path>) -> Result<Manifest> {
    let ds = Dataset::load(data)?;
    let scene = &ctx.config.scene;
    let relabeled = par_map(&ds.sequences, ctx.jobs, |_, seq| {
        let rows = match odometry.map(|d| d.join(format!("{}.csv", seq.name))) {
            Some(p) if p.exists() => {
                let mut rows = read_odometry_csv(&p)?;
                rows.sort_by(|a, b| a.t.total_cmp(&b.t));
                Some(rows)
            }
            _ => None,
        };
        let frames = relabel_sequence(&seq.frames, rows.as_deref(), &seq.extrinsics, scene.gt_threshold(), scene.min_lifespan)?;
        Ok(Sequence { frames, ..seq.clone() })
    });
    let mut out = Dataset::new(relabeled.into_iter().collect::<Result<Vec<_>>>()?);
    out.seed = ds.seed;
    out.config_hash = ds.config_hash;
    let manifest = out.save(&ctx.out)?;
    log::info!("relabeled {} sequences into {}", manifest.sequences.len(), ctx.out.display());
    Ok(manifest)
}

/// Trains on every sequence of `data`; writes the model and the epoch log.
/// The configuration seed drives initialization, shuffling and dropout.
pub fn cmd_train(ctx: &Context, data: &Path) -> Result<TrainLog> {
    let ds = Dataset::load(data)?;
    let mut train_cfg = ctx.config.train.clone();
    train_cfg.seed = ctx.config.seed;
    let (params, log) = train(&ds.sequences, &ctx.config.model, &train_cfg)?;
    ctx.create_out()?;
    save_model(&params, &ctx.out.join(MODEL_FILE))?;
    let path = ctx.out.join(TRAIN_LOG_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    for e in &log.epochs {
        w.serialize(e).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    log::info!(
        "best loss {:.5} at epoch {} after {} epochs ({:.1} s)",
        log.best_loss,
        log.best_epoch,
        log.epochs.len(),
        log.seconds
    );
    Ok(log)
}

fn prediction_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.jsonl"))
}

/// Runs the model over every sequence; writes `<sequence>.jsonl` files.
pub fn cmd_infer(ctx: &Context, data: &Path, model: &Path) -> Result<Vec<PathBuf>> {
    let ds = Dataset::load(data)?;
    let params = load_model(model)?;
    ctx.create_out()?;
    let solver = &ctx.config.solver;
    let written = par_map(&ds.sequences, ctx.jobs, |_, seq| {
        let inf = infer_sequence(&seq.frames, &params, &seq.extrinsics, solver)?;
        let preds: Vec<FramePrediction> = seq
            .frames
            .iter()
            .zip(&inf)
            .map(|(f, i)| FramePrediction::from_inference(f.timestamp, i))
            .collect();
        let path = prediction_path(&ctx.out, &seq.name);
        write_predictions(&path, &preds)?;
        Ok(path)
    });
    written.into_iter().collect()
}

fn load_predictions(dir: &Path, seq: &Sequence) -> Result<Vec<FramePrediction>> {
    read_predictions(prediction_path(dir, &seq.name))
}

/// Scores `<sequence>.jsonl` predictions against the ground truth of `data`
/// and writes `metrics.json`.
pub fn cmd_eval(ctx: &Context, data: &Path, predictions: &Path) -> Result<EvalReport> {
    let ds = Dataset::load(data)?;
    let cfg = ctx.config.eval();
    let reports = par_map(&ds.sequences, ctx.jobs, |_, seq| {
        let preds = load_predictions(predictions, seq)?;
        evaluate_sequence(&seq.name, &seq.frames, &preds, &cfg)
    });
    let report = aggregate(reports.into_iter().collect::<Result<Vec<_>>>()?, &cfg)?;
    ctx.create_out()?;
    write_json(ctx.out.join(METRICS_FILE), &report)?;
    log::info!(
        "F1 {:?} IoU {:?} RTE50 {:?} m",
        report.f1,
        report.iou,
        report.rte_50_m
    );
    Ok(report)
}

/// Static map and trajectories of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMap {
    pub name: String,
    pub gt: Vec<Pose2>,
    pub estimated: Vec<Pose2>,
    /// World position of every static point, with its frame index.
    pub points: Vec<(usize, [f64; 2])>,
}

/// Accumulates the points labeled static through the estimated trajectory.
/// Without predictions the ground-truth labels and odometry stand in for them.
pub fn build_map(seq: &Sequence, preds: Option<&[FramePrediction]>) -> Result<SequenceMap> {
    if let Some(p) = preds {
        if p.len() != seq.frames.len() {
            return Err(Error::LengthMismatch {
                left: seq.frames.len(),
                right: p.len(),
            });
        }
    }
    let mut gt_states = Vec::with_capacity(seq.frames.len());
    let mut est_states = Vec::with_capacity(seq.frames.len());
    let mut labels = Vec::with_capacity(seq.frames.len());
    let mut held = EgoMotionState::new(0.0, 0.0);
    for (i, f) in seq.frames.iter().enumerate() {
        let odom = f.odom.ok_or(Error::MissingOdometry { frame: i })?;
        let (est, classes) = match preds {
            Some(p) => (p[i].ego_state(), p[i].classes()?),
            None => (Some(odom), f.gt.as_ref().ok_or(Error::MissingGroundTruth { frame: i })?.class.clone()),
        };
        if classes.len() != f.len() {
            return Err(Error::LengthMismatch {
                left: f.len(),
                right: classes.len(),
            });
        }
        if let Some(e) = est {
            held = e;
        }
        gt_states.push((odom, f.timestamp));
        est_states.push((held, f.timestamp));
        labels.push(classes);
    }
    let gt = integrate_trajectory(&gt_states);
    let estimated = integrate_trajectory(&est_states);
    let mut points = Vec::new();
    for (i, (f, classes)) in seq.frames.iter().zip(&labels).enumerate() {
        for (p, c) in f.points.iter().zip(classes) {
            if *c == PointClass::Static {
                points.push((i, radar_point_to_world(&estimated[i], &seq.extrinsics, p.position())));
            }
        }
    }
    Ok(SequenceMap {
        name: seq.name.clone(),
        gt,
        estimated,
        points,
    })
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    gt_x: f64,
    gt_y: f64,
    gt_heading: f64,
    est_x: f64,
    est_y: f64,
    est_heading: f64,
}

#[derive(Serialize)]
struct MapRow {
    frame: usize,
    x: f64,
    y: f64,
}

/// Most points drawn in an SVG; the CSV always holds all of them.
pub const SVG_POINT_LIMIT: usize = 20_000;

fn write_map(dir: &Path, seq: &Sequence, map: &SequenceMap) -> Result<()> {
    let path = dir.join(format!("{}_trajectory.csv", map.name));
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    for ((f, g), e) in seq.frames.iter().zip(&map.gt).zip(&map.estimated) {
        w.serialize(TrajectoryRow {
            t: f.timestamp,
            gt_x: g.x,
            gt_y: g.y,
            gt_heading: g.heading,
            est_x: e.x,
            est_y: e.y,
            est_heading: e.heading,
        })
        .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(format!("{}_map.csv", map.name));
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    for &(frame, [x, y]) in &map.points {
        w.serialize(MapRow { frame, x, y }).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let stride = map.points.len().div_ceil(SVG_POINT_LIMIT).max(1);
    let series = [
        Series::Dots {
            label: "static points".into(),
            color: "#1f77b4".into(),
            points: map.points.iter().step_by(stride).map(|(_, p)| *p).collect(),
            radius: 0.6,
        },
        Series::Line {
            label: "ground truth".into(),
            color: "black".into(),
            points: map.gt.iter().map(|p| [p.x, p.y]).collect(),
        },
        Series::Line {
            label: "estimated".into(),
            color: "#d62728".into(),
            points: map.estimated.iter().map(|p| [p.x, p.y]).collect(),
        },
    ];
    let path = dir.join(format!("{}_map.svg", map.name));
    fs::write(&path, svg::render(&map.name, &series, 800.0)).map_err(|e| Error::io(&path, e))
}

/// Writes `<sequence>_map.csv`, `<sequence>_trajectory.csv` and
/// `<sequence>_map.svg` for every sequence.
pub fn cmd_map(ctx: &Context, data: &Path, predictions: Option<&Path>) -> Result<BTreeMap<String, usize>> {
    let ds = Dataset::load(data)?;
    ctx.create_out()?;
    let done = par_map(&ds.sequences, ctx.jobs, |_, seq| {
        let preds = predictions.map(|d| load_predictions(d, seq)).transpose()?;
        let map = build_map(seq, preds.as_deref())?;
        write_map(&ctx.out, seq, &map)?;
        Ok((seq.name.clone(), map.points.len()))
    });
    done.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_order() {
        let items: Vec<usize> = (0..37).collect();
        for jobs in [1, 2, 5, 64] {
            let out = par_map(&items, jobs, |i, &x| (i, x * x));
            assert_eq!(out, items.iter().map(|&x| (x, x * x)).collect::<Vec<_>>());
        }
        assert!(par_map(&[] as &[u8], 4, |_, _| 0).is_empty());
    }
}
