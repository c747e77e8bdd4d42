//! Instance-level detection scores and ego-motion error metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::EgoMotionState;
use crate::trajectory::{arc_lengths, integrate_from, Pose2};

/// Undefined ratios (zero denominators) are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionScores {
    pub fdr: Option<f64>,
    pub mdr: Option<f64>,
    pub f1: Option<f64>,
    pub iou: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn detection_scores(tp: usize, fp: usize, fn_: usize) -> DetectionScores {
    DetectionScores {
        fdr: ratio(fp, fp + tp),
        mdr: ratio(fn_, fn_ + tp),
        f1: ratio(2 * tp, 2 * tp + fp + fn_),
        iou: ratio(tp, tp + fp + fn_),
    }
}

/// F1 from false-discovery and missed-detection rates.
pub fn f1_from_rates(fdr: f64, mdr: f64) -> f64 {
    let precision = 1.0 - fdr;
    let recall = 1.0 - mdr;
    2.0 * precision * recall / (precision + recall)
}

/// Cutoff and saturation value for the speed and yaw-rate errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SRmseConfig {
    /// cm/s
    pub speed_c_err: f64,
    /// cm/s
    pub speed_s: f64,
    /// deg/s
    pub yaw_rate_c_err: f64,
    /// deg/s
    pub yaw_rate_s: f64,
}

impl Default for SRmseConfig {
    fn default() -> Self {
        Self {
            speed_c_err: 50.0,
            speed_s: 50.0,
            yaw_rate_c_err: 2.86,
            yaw_rate_s: 2.86,
        }
    }
}

/// Saturated RMSE: errors beyond `c_err` in magnitude count as `s`.
/// A missing estimate counts as saturated.
pub fn s_rmse(gt: &[f64], est: &[Option<f64>], c_err: f64, s: f64) -> Result<f64> {
    if gt.len() != est.len() {
        return Err(Error::LengthMismatch {
            left: gt.len(),
            right: est.len(),
        });
    }
    if gt.is_empty() {
        return Err(Error::Empty("s_rmse series"));
    }
    let sum: f64 = gt
        .iter()
        .zip(est)
        .map(|(g, e)| match e {
            Some(e) if (g - e).abs() <= c_err => (g - e).powi(2),
            _ => s * s,
        })
        .sum();
    Ok((sum / gt.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RteResult {
    /// Mean endpoint error, meters.
    pub mean: f64,
    /// Endpoint error of each segment.
    pub segments: Vec<f64>,
}

/// Relative trajectory error over consecutive `segment_length` pieces of the
/// ground-truth path.
///
/// `gt_poses[i]` is the true pose at `est[i].1`. Each segment starts at a
/// ground-truth pose (position and heading) and ends at the first pose at
/// least `segment_length` further along the path; the estimate is
/// re-integrated from the start pose over the same interval and compared at
/// the end. Trailing partial segments are dropped.
pub fn rte(gt_poses: &[Pose2], est: &[(EgoMotionState, f64)], segment_length: f64) -> Result<RteResult> {
    if gt_poses.len() != est.len() {
        return Err(Error::LengthMismatch {
            left: gt_poses.len(),
            right: est.len(),
        });
    }
    let arc = arc_lengths(gt_poses);
    let total = arc.last().copied().unwrap_or(0.0);
    let tol = 1e-9 * segment_length.max(1.0);
    if total + tol < segment_length {
        return Err(Error::TrajectoryTooShort {
            length: total,
            segment: segment_length,
        });
    }
    let mut segments = Vec::new();
    let mut start = 0;
    while start < gt_poses.len() {
        let Some(end) = (start + 1..gt_poses.len()).find(|&e| arc[e] - arc[start] + tol >= segment_length) else {
            break;
        };
        let reintegrated = integrate_from(gt_poses[start], &est[start..=end]);
        segments.push(reintegrated[end - start].distance(&gt_poses[end]));
        start = end;
    }
    let mean = segments.iter().sum::<f64>() / segments.len() as f64;
    Ok(RteResult { mean, segments })
}

pub const RTE_SEGMENT: f64 = 50.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::integrate_trajectory;
    use approx::assert_abs_diff_eq;

    #[test]
    fn score_examples() {
        let s = detection_scores(3, 1, 1);
        assert_eq!(s.fdr, Some(0.25));
        assert_eq!(s.mdr, Some(0.25));
        assert_eq!(s.f1, Some(0.75));
        assert_abs_diff_eq!(s.iou.unwrap(), 0.6, epsilon = 1e-15);
        let perfect = detection_scores(5, 0, 0);
        assert_eq!(
            (perfect.fdr, perfect.mdr, perfect.f1, perfect.iou),
            (Some(0.0), Some(0.0), Some(1.0), Some(1.0))
        );
        let empty = detection_scores(0, 0, 0);
        assert_eq!((empty.fdr, empty.f1), (None, None));
        // reported rates of the front-facing radar
        assert_abs_diff_eq!(f1_from_rates(0.064, 0.076), 0.93, epsilon = 0.005);
    }

    #[test]
    fn s_rmse_examples() {
        assert_eq!(s_rmse(&[1.0, 2.0], &[Some(1.0), Some(2.0)], 50.0, 50.0).unwrap(), 0.0);
        let v = s_rmse(&[0.0, 0.0], &[Some(0.0), Some(60.0)], 50.0, 50.0).unwrap();
        assert_abs_diff_eq!(v, (2500.0f64 / 2.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 35.36, epsilon = 0.01);
        let sat = s_rmse(&[0.0; 3], &[Some(70.0), Some(-80.0), None], 50.0, 50.0).unwrap();
        assert_eq!(sat, 50.0);
        assert!(matches!(s_rmse(&[0.0], &[], 1.0, 1.0), Err(Error::LengthMismatch { .. })));
    }

    fn straight(v: f64, n: usize, dt: f64) -> Vec<(EgoMotionState, f64)> {
        (0..n).map(|k| (EgoMotionState::new(v, 0.0), k as f64 * dt)).collect()
    }

    #[test]
    fn rte_identity_and_speed_bias() {
        let gt = straight(10.0, 51, 0.1);
        let poses = integrate_trajectory(&gt);
        assert_eq!(rte(&poses, &gt, 50.0).unwrap().mean, 0.0);
        let biased = straight(10.1, 51, 0.1);
        let r = rte(&poses, &biased, 50.0).unwrap();
        assert_eq!(r.segments.len(), 1);
        assert_abs_diff_eq!(r.mean, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn rte_heading_error_chord() {
        // a brief in-place turn of 1 degree, then 50 m straight
        let dt = 0.1;
        let mut gt = vec![(EgoMotionState::new(0.0, 0.0), 0.0)];
        let mut est = vec![(EgoMotionState::new(0.0, 1f64.to_radians() / dt), 0.0)];
        for k in 1..=51 {
            gt.push((EgoMotionState::new(10.0, 0.0), k as f64 * dt));
            est.push((EgoMotionState::new(10.0, 0.0), k as f64 * dt));
        }
        let poses = integrate_trajectory(&gt);
        let r = rte(&poses, &est, 50.0).unwrap();
        let chord = 2.0 * 50.0 * 0.5f64.to_radians().sin();
        assert_abs_diff_eq!(r.mean, chord, epsilon = 1e-9);
        assert_abs_diff_eq!(r.mean, 0.873, epsilon = 1e-3);
    }

    #[test]
    fn rte_too_short() {
        let gt = straight(1.0, 10, 0.1);
        let poses = integrate_trajectory(&gt);
        assert!(matches!(rte(&poses, &gt, 50.0), Err(Error::TrajectoryTooShort { .. })));
    }
}
