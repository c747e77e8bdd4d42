//! Dead reckoning of the planar vehicle pose from speed and yaw rate.

use serde::{Deserialize, Serialize};

use crate::point::{normalize_azimuth, EgoMotionState, RadarExtrinsics};

/// Below this yaw rate the arc formulas switch to the straight-line limit.
const STRAIGHT_YAW_RATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading }
    }

    /// Maps a point from this pose's body frame into the parent frame.
    pub fn transform(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.heading.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }

    pub fn distance(&self, other: &Pose2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Holds `(v, ω)` constant for `dt` seconds.
    pub fn advance(&self, motion: EgoMotionState, dt: f64) -> Pose2 {
        let (v, w) = (motion.speed, motion.yaw_rate);
        let dh = w * dt;
        let (x, y) = if w.abs() < STRAIGHT_YAW_RATE {
            let (s, c) = (self.heading + 0.5 * dh).sin_cos();
            (self.x + v * dt * c, self.y + v * dt * s)
        } else {
            let r = v / w;
            let (s0, c0) = self.heading.sin_cos();
            let (s1, c1) = (self.heading + dh).sin_cos();
            (self.x + r * (s1 - s0), self.y - r * (c1 - c0))
        };
        Pose2 {
            x,
            y,
            heading: normalize_azimuth(self.heading + dh),
        }
    }
}

/// World position of a radar detection given the vehicle pose.
pub fn radar_point_to_world(pose: &Pose2, extr: &RadarExtrinsics, radar_xy: [f64; 2]) -> [f64; 2] {
    let mount = Pose2::new(extr.x, extr.y, extr.theta);
    pose.transform(mount.transform(radar_xy))
}

/// Integrates a timestamped motion series from `start`. Motion `i` is held
/// over `[t_i, t_{i+1})`; the returned poses are the poses at each timestamp.
pub fn integrate_from(start: Pose2, states: &[(EgoMotionState, f64)]) -> Vec<Pose2> {
    let mut poses = Vec::with_capacity(states.len());
    if states.is_empty() {
        return poses;
    }
    let mut pose = start;
    poses.push(pose);
    for w in states.windows(2) {
        let ((motion, t0), (_, t1)) = (w[0], w[1]);
        debug_assert!(t1 > t0, "timestamps must increase");
        pose = pose.advance(motion, t1 - t0);
        poses.push(pose);
    }
    poses
}

/// Integrates from the origin.
pub fn integrate_trajectory(states: &[(EgoMotionState, f64)]) -> Vec<Pose2> {
    integrate_from(Pose2::default(), states)
}

/// Cumulative path length at each pose.
pub fn arc_lengths(poses: &[Pose2]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(poses.len());
    for (i, p) in poses.iter().enumerate() {
        if i > 0 {
            acc += p.distance(&poses[i - 1]);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn series(v: f64, w: f64, dt: f64, steps: usize) -> Vec<(EgoMotionState, f64)> {
        (0..=steps).map(|k| (EgoMotionState::new(v, w), k as f64 * dt)).collect()
    }

    #[test]
    fn straight_line() {
        let poses = integrate_trajectory(&series(1.0, 0.0, 0.1, 100));
        let end = poses.last().unwrap();
        assert_abs_diff_eq!(end.x, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(end.y, 0.0, epsilon = 1e-12);
        assert_eq!(end.heading, 0.0);
    }

    #[test]
    fn closed_circle() {
        let period = 2.0 * PI / 0.1;
        let steps = 1000;
        let poses = integrate_trajectory(&series(1.0, 0.1, period / steps as f64, steps));
        let end = poses.last().unwrap();
        assert!(end.x.hypot(end.y) < 1e-6, "{end:?}");
        // quarter of the way round sits at (r, r) with r = 10
        let q = poses[steps / 4];
        assert_abs_diff_eq!(q.x, 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q.y, 10.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_motion() {
        let poses = integrate_trajectory(&series(0.0, 0.0, 0.1, 20));
        assert!(poses.iter().all(|p| *p == Pose2::default()));
    }

    #[test]
    fn tiny_yaw_rate_matches_arc_formula() {
        let start = Pose2::new(1.0, 2.0, 0.3);
        let a = start.advance(EgoMotionState::new(5.0, 1e-10), 2.0);
        let b = start.advance(EgoMotionState::new(5.0, 1e-6), 2.0);
        assert!(a.distance(&b) < 1e-5);
    }

    #[test]
    fn arc_length_of_straight_path() {
        let poses = integrate_trajectory(&series(2.0, 0.0, 0.5, 10));
        assert_abs_diff_eq!(*arc_lengths(&poses).last().unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn world_transform_of_mounted_point() {
        let extr = RadarExtrinsics::new(2.0, 1.0, PI / 2.0).unwrap();
        let pose = Pose2::new(10.0, 0.0, 0.0);
        // 3 m along the radar boresight, which points to the vehicle's left
        let w = radar_point_to_world(&pose, &extr, [3.0, 0.0]);
        assert_abs_diff_eq!(w[0], 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 4.0, epsilon = 1e-12);
    }
}
