//! Radar detections, frames, moving windows and the motion states shared by
//! every other module.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;

/// Wraps an angle into `[-π, π)`.
pub fn normalize_azimuth(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let wrapped = angle - two_pi * ((angle + PI) / two_pi).floor();
    if wrapped >= PI {
        wrapped - two_pi
    } else {
        wrapped
    }
}

/// One radar detection in polar radar-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarPoint {
    /// Meters.
    pub range: f64,
    /// Angle of arrival in radians, counter-clockwise from the boresight.
    pub azimuth: f64,
    /// Measured (ego-motion uncompensated) Doppler velocity, m/s.
    pub radial_velocity: f64,
    /// Radar cross section in dBsm, when the sensor reports it.
    pub rcs: Option<f64>,
}

impl RadarPoint {
    pub fn new(range: f64, azimuth: f64, radial_velocity: f64) -> Self {
        Self {
            range,
            azimuth,
            radial_velocity,
            rcs: None,
        }
    }

    pub fn with_rcs(mut self, rcs: f64) -> Self {
        self.rcs = Some(rcs);
        self
    }

    /// Cartesian position in the radar frame.
    pub fn position(&self) -> [f64; 2] {
        [
            self.range * self.azimuth.cos(),
            self.range * self.azimuth.sin(),
        ]
    }

    /// Network input features `[range, azimuth, v_r, rcs]`, truncated to `m`.
    /// A missing RCS reads as 0.
    pub fn features(&self, m: usize) -> [f64; 4] {
        let mut f = [
            self.range,
            self.azimuth,
            self.radial_velocity,
            self.rcs.unwrap_or(0.0),
        ];
        for v in f.iter_mut().skip(m) {
            *v = 0.0;
        }
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointClass {
    Static,
    Moving,
    FalsePositive,
}

impl PointClass {
    pub fn code(self) -> u8 {
        match self {
            PointClass::Static => 0,
            PointClass::Moving => 1,
            PointClass::FalsePositive => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(PointClass::Static),
            1 => Some(PointClass::Moving),
            2 => Some(PointClass::FalsePositive),
            _ => None,
        }
    }
}

/// Per-point class and, for moving points, the id of the object they belong to.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruthLabels {
    pub class: Vec<PointClass>,
    pub instance: Vec<Option<u32>>,
}

impl GroundTruthLabels {
    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn count(&self, class: PointClass) -> usize {
        self.class.iter().filter(|&&c| c == class).count()
    }
}

/// Mounting pose of the radar relative to the rear-axle center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarExtrinsics {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl RadarExtrinsics {
    /// Rejects `x = 0`, for which the yaw rate cannot be recovered.
    pub fn new(x: f64, y: f64, theta: f64) -> Result<Self, SolverError> {
        if x == 0.0 || !x.is_finite() || !y.is_finite() || !theta.is_finite() {
            return Err(SolverError::DegenerateExtrinsics);
        }
        Ok(Self {
            x,
            y,
            theta: normalize_azimuth(theta),
        })
    }
}

impl Default for RadarExtrinsics {
    /// A front-right corner radar, angled outwards.
    fn default() -> Self {
        Self {
            x: 3.6,
            y: -0.75,
            theta: -0.3,
        }
    }
}

/// Velocity of the radar expressed in its own frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RadarMotion {
    pub vx: f64,
    pub vy: f64,
}

/// Planar vehicle motion: forward speed and yaw rate. The lateral speed is
/// zero by the non-holonomic vehicle model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EgoMotionState {
    /// Forward speed of the rear-axle center, m/s.
    pub speed: f64,
    /// Yaw rate, rad/s.
    pub yaw_rate: f64,
}

impl EgoMotionState {
    pub fn new(speed: f64, yaw_rate: f64) -> Self {
        Self { speed, yaw_rate }
    }

    pub fn is_finite(&self) -> bool {
        self.speed.is_finite() && self.yaw_rate.is_finite()
    }
}

/// Initial and updated weights of both prediction heads for one frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointWeights {
    pub static_ini: Vec<f64>,
    pub static_new: Vec<f64>,
    pub moving_ini: Vec<f64>,
    pub moving_new: Vec<f64>,
}

/// One timestamped point cloud from a single sensor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadarFrame {
    pub timestamp: f64,
    pub sensor_id: u8,
    pub points: Vec<RadarPoint>,
    pub gt: Option<GroundTruthLabels>,
    pub odom: Option<EgoMotionState>,
}

impl RadarFrame {
    pub fn new(timestamp: f64, points: Vec<RadarPoint>) -> Self {
        Self {
            timestamp,
            points,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `T` consecutive frames of one sequence. The network predicts for the last
/// frame. Frames keep their own point counts; the mask describes the padded
/// `T x max(N)` layout.
#[derive(Debug, Clone, Copy)]
pub struct FrameWindow<'a> {
    frames: &'a [RadarFrame],
}

impl<'a> FrameWindow<'a> {
    /// Panics if `frames` is empty.
    pub fn new(frames: &'a [RadarFrame]) -> Self {
        assert!(!frames.is_empty(), "a window needs at least one frame");
        Self { frames }
    }

    pub fn frames(&self) -> &'a [RadarFrame] {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> &'a RadarFrame {
        &self.frames[self.frames.len() - 1]
    }

    /// Largest point count in the window.
    pub fn padded_len(&self) -> usize {
        self.frames.iter().map(RadarFrame::len).max().unwrap_or(0)
    }

    /// Validity flags of the padded layout; `true` marks a real point.
    pub fn mask(&self) -> Vec<Vec<bool>> {
        let n = self.padded_len();
        self.frames
            .iter()
            .map(|f| (0..n).map(|i| i < f.len()).collect())
            .collect()
    }

    pub fn is_ordered(&self) -> bool {
        self.frames
            .windows(2)
            .all(|w| w[0].timestamp < w[1].timestamp)
    }
}

/// All length-`t` moving windows of a sequence, `L - t + 1` of them.
pub fn sliding_windows(frames: &[RadarFrame], t: usize) -> impl Iterator<Item = FrameWindow<'_>> {
    assert!(t >= 1, "window length must be at least 1");
    frames.windows(t).map(FrameWindow::new)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NegativeRange,
    AzimuthOutOfRange,
    NonFiniteRange,
    NonFiniteRadialVelocity,
    NonFiniteRcs,
    NonFiniteTimestamp,
    LabelCountMismatch,
    InstanceWithoutMoving,
    MovingWithoutInstance,
    NonFiniteOdometry,
    TimestampNotIncreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Index of the offending point, if the violation is point-level.
    pub point: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::NegativeRange => "negative range",
            ViolationKind::AzimuthOutOfRange => "azimuth out of range",
            ViolationKind::NonFiniteRange => "range not finite",
            ViolationKind::NonFiniteRadialVelocity => "radial velocity not finite",
            ViolationKind::NonFiniteRcs => "rcs not finite",
            ViolationKind::NonFiniteTimestamp => "timestamp not finite",
            ViolationKind::LabelCountMismatch => "label count differs from point count",
            ViolationKind::InstanceWithoutMoving => "instance id on a non-moving point",
            ViolationKind::MovingWithoutInstance => "moving point without instance id",
            ViolationKind::NonFiniteOdometry => "odometry not finite",
            ViolationKind::TimestampNotIncreasing => "timestamp not strictly increasing",
        };
        match self.point {
            Some(i) => write!(f, "point {i}: {what}"),
            None => f.write_str(what),
        }
    }
}

/// Checks every point- and frame-level invariant; one record per failure.
pub fn validate_frame(frame: &RadarFrame) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |point, kind| out.push(Violation { point, kind });

    if !frame.timestamp.is_finite() {
        push(None, ViolationKind::NonFiniteTimestamp);
    }
    for (i, p) in frame.points.iter().enumerate() {
        if !p.range.is_finite() {
            push(Some(i), ViolationKind::NonFiniteRange);
        } else if p.range < 0.0 {
            push(Some(i), ViolationKind::NegativeRange);
        }
        if !(p.azimuth >= -PI && p.azimuth < PI) {
            push(Some(i), ViolationKind::AzimuthOutOfRange);
        }
        if !p.radial_velocity.is_finite() {
            push(Some(i), ViolationKind::NonFiniteRadialVelocity);
        }
        if p.rcs.is_some_and(|r| !r.is_finite()) {
            push(Some(i), ViolationKind::NonFiniteRcs);
        }
    }
    if let Some(gt) = &frame.gt {
        if gt.class.len() != frame.points.len() || gt.instance.len() != frame.points.len() {
            push(None, ViolationKind::LabelCountMismatch);
        } else {
            for (i, (c, inst)) in gt.class.iter().zip(&gt.instance).enumerate() {
                match (c, inst) {
                    (PointClass::Moving, None) => push(Some(i), ViolationKind::MovingWithoutInstance),
                    (PointClass::Static | PointClass::FalsePositive, Some(_)) => {
                        push(Some(i), ViolationKind::InstanceWithoutMoving)
                    }
                    _ => {}
                }
            }
        }
    }
    if frame.odom.is_some_and(|o| !o.is_finite()) {
        push(None, ViolationKind::NonFiniteOdometry);
    }
    out
}

/// Frame-level checks plus strict timestamp ordering; violations are tagged
/// with the frame index.
pub fn validate_sequence(frames: &[RadarFrame]) -> Vec<(usize, Violation)> {
    let mut out: Vec<(usize, Violation)> = frames
        .iter()
        .enumerate()
        .flat_map(|(k, f)| validate_frame(f).into_iter().map(move |v| (k, v)))
        .collect();
    for (k, w) in frames.windows(2).enumerate() {
        if !(w[1].timestamp > w[0].timestamp) {
            out.push((
                k + 1,
                Violation {
                    point: None,
                    kind: ViolationKind::TimestampNotIncreasing,
                },
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> RadarFrame {
        RadarFrame::new(
            0.5,
            vec![
                RadarPoint::new(5.0, -0.3, -2.0).with_rcs(3.0),
                RadarPoint::new(12.0, 0.1, 1.5).with_rcs(-4.0),
                RadarPoint::new(30.0, 0.9, -7.0),
            ],
        )
    }

    #[test]
    fn valid_frame_has_no_violations() {
        assert!(validate_frame(&frame()).is_empty());
    }

    #[test]
    fn azimuth_out_of_range_is_reported() {
        let mut f = frame();
        f.points[1].azimuth = 7.0;
        let v = validate_frame(&f);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::AzimuthOutOfRange);
        assert!(v[0].to_string().contains("azimuth out of range"));
    }

    #[test]
    fn nan_radial_velocity_names_point() {
        let mut f = frame();
        f.points[2].radial_velocity = f64::NAN;
        let v = validate_frame(&f);
        assert_eq!(
            v,
            vec![Violation {
                point: Some(2),
                kind: ViolationKind::NonFiniteRadialVelocity
            }]
        );
        assert_eq!(v[0].to_string(), "point 2: radial velocity not finite");
    }

    #[test]
    fn label_invariants() {
        let mut f = frame();
        f.gt = Some(GroundTruthLabels {
            class: vec![PointClass::Static, PointClass::Moving, PointClass::FalsePositive],
            instance: vec![Some(1), None, None],
        });
        let kinds: Vec<_> = validate_frame(&f).into_iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            vec![ViolationKind::InstanceWithoutMoving, ViolationKind::MovingWithoutInstance]
        );
        f.gt.as_mut().unwrap().class.pop();
        let kinds: Vec<_> = validate_frame(&f).into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::LabelCountMismatch]);
    }

    #[test]
    fn sequence_ordering() {
        let mut seq = vec![frame(), frame(), frame()];
        seq[1].timestamp = 0.6;
        seq[2].timestamp = 0.6;
        let v = validate_sequence(&seq);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].0, 2);
    }

    #[test]
    fn azimuth_normalization() {
        assert_eq!(normalize_azimuth(PI), -PI);
        assert!((normalize_azimuth(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(normalize_azimuth(0.25), 0.25);
        for k in -20..20 {
            let a = normalize_azimuth(k as f64 * 0.77);
            assert!((-PI..PI).contains(&a));
        }
    }

    #[test]
    fn window_count_and_mask() {
        let seq: Vec<RadarFrame> = (0..10)
            .map(|k| {
                let pts = vec![RadarPoint::new(1.0, 0.0, 0.0); k % 4];
                RadarFrame::new(k as f64 * 0.06, pts)
            })
            .collect();
        for t in 1..=10 {
            let windows: Vec<_> = sliding_windows(&seq, t).collect();
            assert_eq!(windows.len(), 10 - t + 1);
            assert!(windows.iter().all(|w| w.is_ordered() && w.len() == t));
        }
        let w = sliding_windows(&seq, 3).nth(1).unwrap();
        let mask = w.mask();
        assert_eq!(w.padded_len(), 3);
        let real: Vec<usize> = mask.iter().map(|m| m.iter().filter(|&&b| b).count()).collect();
        assert_eq!(real, vec![1, 2, 3]);
    }

    #[test]
    fn extrinsics_reject_zero_x() {
        assert_eq!(
            RadarExtrinsics::new(0.0, 1.0, 0.0),
            Err(SolverError::DegenerateExtrinsics)
        );
        assert!(RadarExtrinsics::new(3.0, 0.0, 0.0).is_ok());
    }
}
