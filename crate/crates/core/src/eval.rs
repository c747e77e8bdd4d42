//! Per-frame predictions and the evaluation report built from them.
//!
//! Prediction files are JSON Lines, one frame per line:
//! `{"v":1,"t":..,"labels":[..],"static_ini":[..],"static_new":[..],"moving_ini":[..],"moving_new":[..],"ego":[v,omega]|null}`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ego::FrameInference;
use crate::error::{Error, Result};
use crate::instance::{match_frame, ClusterConfig, InstanceReport};
use crate::metrics::{detection_scores, rte, s_rmse, SRmseConfig, RTE_SEGMENT};
use crate::point::{EgoMotionState, PointClass, RadarFrame};
use crate::trajectory::integrate_trajectory;

pub const PREDICTION_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePrediction {
    #[serde(default)]
    pub v: Option<u32>,
    pub t: f64,
    /// Class codes, as in the frame format.
    pub labels: Vec<u8>,
    #[serde(default)]
    pub static_ini: Vec<f64>,
    #[serde(default)]
    pub static_new: Vec<f64>,
    #[serde(default)]
    pub moving_ini: Vec<f64>,
    #[serde(default)]
    pub moving_new: Vec<f64>,
    /// Speed and yaw rate; `null` when the solver failed.
    pub ego: Option<[f64; 2]>,
}

impl FramePrediction {
    pub fn from_inference(t: f64, inf: &FrameInference) -> Self {
        Self {
            v: Some(PREDICTION_FORMAT_VERSION),
            t,
            labels: inf.labels.iter().map(|c| c.code()).collect(),
            static_ini: inf.weights.static_ini.clone(),
            static_new: inf.weights.static_new.clone(),
            moving_ini: inf.weights.moving_ini.clone(),
            moving_new: inf.weights.moving_new.clone(),
            ego: inf.ego.map(|e| [e.speed, e.yaw_rate]),
        }
    }

    /// Ground truth recast as a prediction.
    pub fn from_ground_truth(frame: &RadarFrame) -> Option<Self> {
        let gt = frame.gt.as_ref()?;
        Some(Self {
            v: Some(PREDICTION_FORMAT_VERSION),
            t: frame.timestamp,
            labels: gt.class.iter().map(|c| c.code()).collect(),
            static_ini: Vec::new(),
            static_new: Vec::new(),
            moving_ini: Vec::new(),
            moving_new: Vec::new(),
            ego: frame.odom.map(|o| [o.speed, o.yaw_rate]),
        })
    }

    pub fn classes(&self) -> Result<Vec<PointClass>> {
        self.labels
            .iter()
            .map(|&c| {
                PointClass::from_code(c).ok_or_else(|| Error::Format {
                    context: "prediction".into(),
                    message: format!("unknown class code {c}"),
                })
            })
            .collect()
    }

    pub fn ego_state(&self) -> Option<EgoMotionState> {
        self.ego.map(|[v, w]| EgoMotionState::new(v, w))
    }
}

pub fn write_predictions(path: impl AsRef<Path>, preds: &[FramePrediction]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for p in preds {
        let line = serde_json::to_string(p).expect("predictions serialize");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<FramePrediction>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut preds = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: FramePrediction = serde_json::from_str(&line).map_err(|e| Error::Format {
            context: format!("{}:{}", path.display(), i + 1),
            message: e.to_string(),
        })?;
        if let Some(v) = p.v.filter(|&v| v != PREDICTION_FORMAT_VERSION) {
            return Err(Error::Version {
                what: "prediction record",
                found: v,
                expected: PREDICTION_FORMAT_VERSION,
            });
        }
        preds.push(p);
    }
    Ok(preds)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalConfig {
    pub cluster: ClusterConfig,
    pub s_rmse: SRmseConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub name: String,
    pub frames: usize,
    pub fdr: Option<f64>,
    pub mdr: Option<f64>,
    pub f1: Option<f64>,
    pub iou: Option<f64>,
    pub s_rmse_vx_cm_s: f64,
    pub s_rmse_omega_deg_s: f64,
    /// `None` when the sequence is shorter than one segment.
    pub rte_50_m: Option<f64>,
    pub counts: Counts,
    /// Frames without an ego estimate.
    pub missing_ego: usize,
    #[serde(skip)]
    pub rte_segments: Vec<f64>,
    #[serde(skip)]
    speed_errors: Vec<(f64, Option<f64>)>,
    #[serde(skip)]
    yaw_errors: Vec<(f64, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fdr: Option<f64>,
    pub mdr: Option<f64>,
    pub f1: Option<f64>,
    pub iou: Option<f64>,
    pub s_rmse_vx_cm_s: f64,
    pub s_rmse_omega_deg_s: f64,
    /// Mean over all segments of all sequences.
    pub rte_50_m: Option<f64>,
    pub counts: Counts,
    pub per_sequence: Vec<SequenceReport>,
}

fn series_s_rmse(pairs: &[(f64, Option<f64>)], c_err: f64, s: f64) -> Result<f64> {
    let gt: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let est: Vec<Option<f64>> = pairs.iter().map(|p| p.1).collect();
    s_rmse(&gt, &est, c_err, s)
}

/// Scores the predictions of one sequence against its ground truth labels
/// and odometry. Frames without an ego estimate count as saturated in the
/// S-RMSE and hold the previous estimate when integrating the trajectory.
pub fn evaluate_sequence(
    name: &str,
    frames: &[RadarFrame],
    preds: &[FramePrediction],
    config: &EvalConfig,
) -> Result<SequenceReport> {
    if frames.len() != preds.len() {
        return Err(Error::LengthMismatch {
            left: frames.len(),
            right: preds.len(),
        });
    }
    if frames.is_empty() {
        return Err(Error::Empty("sequence"));
    }
    let mut instances = InstanceReport::default();
    let mut speed = Vec::with_capacity(frames.len());
    let mut yaw = Vec::with_capacity(frames.len());
    let mut gt_states = Vec::with_capacity(frames.len());
    let mut est_states = Vec::with_capacity(frames.len());
    let mut held = EgoMotionState::new(0.0, 0.0);
    let mut missing_ego = 0;
    for (i, (frame, pred)) in frames.iter().zip(preds).enumerate() {
        let gt = frame.gt.as_ref().ok_or(Error::MissingGroundTruth { frame: i })?;
        let odom = frame.odom.ok_or(Error::MissingOdometry { frame: i })?;
        let labels = pred.classes()?;
        if labels.len() != frame.len() {
            return Err(Error::LengthMismatch {
                left: frame.len(),
                right: labels.len(),
            });
        }
        instances.push(match_frame(&frame.points, &gt.class, &labels, &config.cluster));

        let est = pred.ego_state();
        if est.is_none() {
            missing_ego += 1;
        }
        speed.push((odom.speed * 100.0, est.map(|e| e.speed * 100.0)));
        yaw.push((odom.yaw_rate.to_degrees(), est.map(|e| e.yaw_rate.to_degrees())));
        if let Some(e) = est {
            held = e;
        }
        gt_states.push((odom, frame.timestamp));
        est_states.push((held, frame.timestamp));
    }

    let (tp, fp, fn_) = instances.totals();
    let scores = detection_scores(tp, fp, fn_);
    let gt_poses = integrate_trajectory(&gt_states);
    let rte_result = match rte(&gt_poses, &est_states, RTE_SEGMENT) {
        Ok(r) => Some(r),
        Err(Error::TrajectoryTooShort { .. }) => None,
        Err(e) => return Err(e),
    };
    let c = config.s_rmse;
    Ok(SequenceReport {
        name: name.to_owned(),
        frames: frames.len(),
        fdr: scores.fdr,
        mdr: scores.mdr,
        f1: scores.f1,
        iou: scores.iou,
        s_rmse_vx_cm_s: series_s_rmse(&speed, c.speed_c_err, c.speed_s)?,
        s_rmse_omega_deg_s: series_s_rmse(&yaw, c.yaw_rate_c_err, c.yaw_rate_s)?,
        rte_50_m: rte_result.as_ref().map(|r| r.mean),
        counts: Counts { tp, fp, fn_ },
        missing_ego,
        rte_segments: rte_result.map(|r| r.segments).unwrap_or_default(),
        speed_errors: speed,
        yaw_errors: yaw,
    })
}

/// Pools counts, S-RMSE series and RTE segments over sequences.
pub fn aggregate(per_sequence: Vec<SequenceReport>, config: &EvalConfig) -> Result<EvalReport> {
    if per_sequence.is_empty() {
        return Err(Error::Empty("evaluation sequences"));
    }
    let mut counts = Counts::default();
    let mut speed = Vec::new();
    let mut yaw = Vec::new();
    let mut segments = Vec::new();
    for s in &per_sequence {
        counts.tp += s.counts.tp;
        counts.fp += s.counts.fp;
        counts.fn_ += s.counts.fn_;
        speed.extend_from_slice(&s.speed_errors);
        yaw.extend_from_slice(&s.yaw_errors);
        segments.extend_from_slice(&s.rte_segments);
    }
    let scores = detection_scores(counts.tp, counts.fp, counts.fn_);
    let c = config.s_rmse;
    Ok(EvalReport {
        fdr: scores.fdr,
        mdr: scores.mdr,
        f1: scores.f1,
        iou: scores.iou,
        s_rmse_vx_cm_s: series_s_rmse(&speed, c.speed_c_err, c.speed_s)?,
        s_rmse_omega_deg_s: series_s_rmse(&yaw, c.yaw_rate_c_err, c.yaw_rate_s)?,
        rte_50_m: (!segments.is_empty()).then(|| segments.iter().sum::<f64>() / segments.len() as f64),
        counts,
        per_sequence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_sequence, SceneConfig};

    #[test]
    fn ground_truth_scores_perfectly() {
        let mut cfg = SceneConfig::default();
        cfg.duration = 8.0;
        let seq = simulate_sequence(&cfg, 4).unwrap();
        let preds: Vec<FramePrediction> = seq.frames.iter().map(|f| FramePrediction::from_ground_truth(f).unwrap()).collect();
        let eval = EvalConfig::default();
        let r = evaluate_sequence("s", &seq.frames, &preds, &eval).unwrap();
        let report = aggregate(vec![r], &eval).unwrap();
        assert!(report.counts.tp > 0);
        assert_eq!((report.f1, report.iou), (Some(1.0), Some(1.0)));
        assert_eq!(report.rte_50_m, Some(0.0));
        assert_eq!(report.s_rmse_vx_cm_s, 0.0);
    }

    #[test]
    fn missing_ground_truth_is_rejected() {
        let seq = simulate_sequence(&SceneConfig::default(), 1).unwrap();
        let preds: Vec<FramePrediction> = seq.frames.iter().map(|f| FramePrediction::from_ground_truth(f).unwrap()).collect();
        let mut frames = seq.frames.clone();
        frames[3].gt = None;
        let r = evaluate_sequence("s", &frames, &preds, &EvalConfig::default());
        assert!(matches!(r, Err(Error::MissingGroundTruth { frame: 3 })));
    }

    #[test]
    fn prediction_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let p = FramePrediction {
            v: Some(1),
            t: 0.5,
            labels: vec![0, 1, 2],
            static_ini: vec![0.9, 0.1, 0.0],
            static_new: vec![30.0, 0.0, 0.0],
            moving_ini: vec![0.0, 0.8, 0.0],
            moving_new: vec![0.0, 0.8, 0.0],
            ego: None,
        };
        write_predictions(&path, &[p.clone()]).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), vec![p]);
        std::fs::write(&path, "{\"v\":2,\"t\":0,\"labels\":[],\"ego\":null}\n").unwrap();
        assert!(matches!(read_predictions(&path), Err(Error::Version { found: 2, .. })));
    }
}
