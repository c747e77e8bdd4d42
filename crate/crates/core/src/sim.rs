//! Synthetic radar sequences with exact ground truth.
//!
//! The ego vehicle drives a piecewise-constant (speed, yaw rate) profile along
//! a road lined with point landmarks. Moving targets travel in the road lanes
//! with constant velocity and shed a Poisson number of detections over their
//! footprint. False positives are scattered uniformly over the field of view
//! with a uniformly random Doppler. Labels are produced with the same rules
//! used to label recorded data, using the true ego-motion and the true
//! moving-target membership as annotation.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::ego::{static_radial_velocity, vehicle_to_radar};
use crate::dataset::{Dataset, Sequence};
use crate::error::{Error, Result};
use crate::labels::{apply_lifespan_filter, generate_gt_labels, DEFAULT_MIN_LIFESPAN};
use crate::point::{EgoMotionState, RadarExtrinsics, RadarFrame, RadarMotion, RadarPoint};
use crate::trajectory::Pose2;

/// One piece of the ego profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoSegment {
    pub duration: f64,
    pub speed: f64,
    pub yaw_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Seconds.
    pub duration: f64,
    /// Frames per second.
    pub frame_rate: f64,
    /// Landmarks per meter of road edge, per side.
    pub landmark_density: f64,
    /// Lateral distance from the road center to the first landmark row.
    pub road_half_width: f64,
    /// Extra lateral scatter of landmarks beyond the road edge.
    pub landmark_scatter: f64,
    /// Per-frame detection probability of a visible landmark.
    pub landmark_detection_prob: f64,
    /// Number of moving targets kept in the scene at any time.
    pub moving_objects: usize,
    /// Target speed range, m/s.
    pub target_speed: [f64; 2],
    /// Mean detections per target and frame.
    pub target_points: f64,
    /// Target footprint `[length, width]`, meters.
    pub target_size: [f64; 2],
    /// Number of slow walkers kept in the scene. They move in arbitrary
    /// directions anywhere between the landmark rows.
    pub pedestrians: usize,
    pub pedestrian_speed: [f64; 2],
    pub pedestrian_size: [f64; 2],
    pub pedestrian_points: f64,
    /// Lateral offsets of the lanes targets drive in (positive = left);
    /// targets in lanes left of the road center drive against the ego.
    pub lanes: Vec<f64>,
    /// Mean false positives per frame.
    pub false_positive_rate: f64,

    /// Unambiguous Doppler span `[-max, max]`, m/s.
    pub doppler_max: f64,
    pub noise_radial_velocity: f64,
    pub noise_range: f64,
    pub noise_azimuth: f64,
    pub max_range: f64,
    pub min_range: f64,
    /// Azimuth half-angle of the field of view, radians.
    pub fov_half_angle: f64,
    pub extrinsics: RadarExtrinsics,
    /// Explicit ego profile; when empty, a random two-segment profile is
    /// drawn from `ego_speed` and `ego_yaw_rate_max`.
    pub ego_profile: Vec<EgoSegment>,
    pub ego_speed: [f64; 2],
    pub ego_yaw_rate_max: f64,
    /// Whether detections carry an RCS value.
    pub with_rcs: bool,
    /// `[mean, std]` of the RCS, dBsm.
    pub rcs_static: [f64; 2],
    pub rcs_moving: [f64; 2],
    pub rcs_false_positive: [f64; 2],
    /// Static-labeling residual threshold; `None` means three Doppler noise stds.
    pub gt_residual_threshold: Option<f64>,
    pub min_lifespan: usize,
    pub sensor_id: u8,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            duration: 6.0,
            frame_rate: 16.7,
            landmark_density: 0.25,
            road_half_width: 8.0,
            landmark_scatter: 6.0,
            landmark_detection_prob: 0.7,
            moving_objects: 3,
            target_speed: [4.0, 14.0],
            target_points: 4.0,
            target_size: [4.5, 1.8],
            pedestrians: 0,
            pedestrian_speed: [0.5, 2.0],
            pedestrian_size: [0.6, 0.6],
            pedestrian_points: 3.0,
            lanes: vec![-3.5, 0.0, 3.5],
            false_positive_rate: 8.0,
            doppler_max: 30.0,
            noise_radial_velocity: 0.013,
            noise_range: 0.05,
            noise_azimuth: 0.0005,
            max_range: 70.0,
            min_range: 1.0,
            fov_half_angle: 1.05,
            extrinsics: RadarExtrinsics::default(),
            ego_profile: Vec::new(),
            ego_speed: [6.0, 14.0],
            ego_yaw_rate_max: 0.08,
            with_rcs: true,
            rcs_static: [5.0, 5.0],
            rcs_moving: [8.0, 4.0],
            rcs_false_positive: [-2.0, 5.0],
            gt_residual_threshold: None,
            min_lifespan: DEFAULT_MIN_LIFESPAN,
            sensor_id: 3,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be non-negative, got {v}")))
            }
        };
        positive("duration", self.duration)?;
        positive("frame_rate", self.frame_rate)?;
        positive("max_range", self.max_range)?;
        positive("fov_half_angle", self.fov_half_angle)?;
        if self.fov_half_angle > PI {
            return Err(Error::config("fov_half_angle", "must not exceed pi"));
        }
        non_negative("min_range", self.min_range)?;
        if self.min_range >= self.max_range {
            return Err(Error::config("min_range", "must be below max_range"));
        }
        non_negative("landmark_density", self.landmark_density)?;
        non_negative("road_half_width", self.road_half_width)?;
        non_negative("landmark_scatter", self.landmark_scatter)?;
        if !(0.0..=1.0).contains(&self.landmark_detection_prob) {
            return Err(Error::config("landmark_detection_prob", "must lie in [0, 1]"));
        }
        non_negative("target_points", self.target_points)?;
        non_negative("target_speed", self.target_speed[0])?;
        if self.target_speed[1] < self.target_speed[0] {
            return Err(Error::config("target_speed", "upper bound below lower bound"));
        }
        positive("target_size", self.target_size[0].min(self.target_size[1]))?;
        non_negative("pedestrian_speed", self.pedestrian_speed[0])?;
        if self.pedestrian_speed[1] < self.pedestrian_speed[0] {
            return Err(Error::config("pedestrian_speed", "upper bound below lower bound"));
        }
        positive("pedestrian_size", self.pedestrian_size[0].min(self.pedestrian_size[1]))?;
        non_negative("pedestrian_points", self.pedestrian_points)?;
        if self.moving_objects > 0 && self.lanes.is_empty() {
            return Err(Error::config("lanes", "moving objects need at least one lane"));
        }
        non_negative("false_positive_rate", self.false_positive_rate)?;
        positive("doppler_max", self.doppler_max)?;
        non_negative("noise_radial_velocity", self.noise_radial_velocity)?;
        non_negative("noise_range", self.noise_range)?;
        non_negative("noise_azimuth", self.noise_azimuth)?;
        for (k, s) in self.ego_profile.iter().enumerate() {
            if !(s.duration > 0.0) || !s.speed.is_finite() || !s.yaw_rate.is_finite() {
                return Err(Error::config(format!("ego_profile[{k}]"), "needs positive duration and finite motion"));
            }
        }
        non_negative("ego_speed", self.ego_speed[0])?;
        if self.ego_speed[1] < self.ego_speed[0] {
            return Err(Error::config("ego_speed", "upper bound below lower bound"));
        }
        non_negative("ego_yaw_rate_max", self.ego_yaw_rate_max)?;
        for (key, r) in [
            ("rcs_static", self.rcs_static),
            ("rcs_moving", self.rcs_moving),
            ("rcs_false_positive", self.rcs_false_positive),
        ] {
            non_negative(key, r[1])?;
        }
        if let Some(t) = self.gt_residual_threshold {
            non_negative("gt_residual_threshold", t)?;
        }
        RadarExtrinsics::new(self.extrinsics.x, self.extrinsics.y, self.extrinsics.theta)
            .map_err(|e| Error::config("extrinsics", e.to_string()))?;
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate + 1e-9).floor() as usize
    }

    /// Residual threshold used for static ground truth.
    pub fn gt_threshold(&self) -> f64 {
        self.gt_residual_threshold
            .unwrap_or(3.0 * self.noise_radial_velocity)
            .max(1e-9)
    }
}

/// Where a simulated detection came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointOrigin {
    Landmark(usize),
    Target(u32),
    Clutter,
}

/// A target visible in a frame, with its footprint center in radar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSnapshot {
    pub id: u32,
    pub center: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSequence {
    pub frames: Vec<RadarFrame>,
    /// True ego-motion at each frame.
    pub ego: Vec<EgoMotionState>,
    /// True vehicle pose at each frame.
    pub poses: Vec<Pose2>,
    pub origins: Vec<Vec<PointOrigin>>,
    pub targets: Vec<Vec<TargetSnapshot>>,
    /// World positions of all landmarks.
    pub landmarks: Vec<[f64; 2]>,
    pub extrinsics: RadarExtrinsics,
}

struct Profile {
    segments: Vec<EgoSegment>,
}

impl Profile {
    fn state_at(&self, t: f64) -> EgoMotionState {
        let mut t0 = 0.0;
        for s in &self.segments {
            if t < t0 + s.duration {
                return EgoMotionState::new(s.speed, s.yaw_rate);
            }
            t0 += s.duration;
        }
        let last = self.segments.last().expect("non-empty profile");
        EgoMotionState::new(last.speed, last.yaw_rate)
    }

    fn pose_at(&self, t: f64) -> Pose2 {
        let mut pose = Pose2::default();
        let mut t0 = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            let last = k + 1 == self.segments.len();
            let dt = if last { t - t0 } else { (t - t0).min(s.duration) };
            if dt <= 0.0 {
                break;
            }
            pose = pose.advance(EgoMotionState::new(s.speed, s.yaw_rate), dt);
            t0 += s.duration;
        }
        pose
    }
}

/// Road center line sampled every `step` meters.
struct Road {
    points: Vec<Pose2>,
    step: f64,
}

impl Road {
    fn along(&self, s: f64) -> Pose2 {
        let i = ((s / self.step).round().max(0.0) as usize).min(self.points.len() - 1);
        self.points[i]
    }

    fn nearest_index(&self, p: &Pose2) -> usize {
        self.points
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance(p).total_cmp(&b.1.distance(p)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    fn offset(pose: &Pose2, lateral: f64) -> [f64; 2] {
        pose.transform([0.0, lateral])
    }
}

fn build_road(profile: &Profile, duration: f64, ahead: f64, behind: f64, step: f64) -> Road {
    let mut points = Vec::new();
    let start = profile.pose_at(0.0);
    let back = start.heading + PI;
    let n_back = (behind / step).ceil() as usize;
    for k in (1..=n_back).rev() {
        let d = k as f64 * step;
        points.push(Pose2::new(start.x + d * back.cos(), start.y + d * back.sin(), start.heading));
    }
    let dt = 0.005;
    let mut last = start;
    points.push(last);
    let mut t = 0.0;
    while t < duration {
        t += dt;
        let p = profile.pose_at(t);
        if p.distance(&last) >= step {
            points.push(p);
            last = p;
        }
    }
    let end = profile.pose_at(duration);
    let n_ahead = (ahead / step).ceil() as usize;
    for k in 1..=n_ahead {
        let d = k as f64 * step;
        points.push(Pose2::new(end.x + d * end.heading.cos(), end.y + d * end.heading.sin(), end.heading));
    }
    Road { points, step }
}

struct Target {
    id: u32,
    size: [f64; 2],
    points: f64,
    origin: [f64; 2],
    velocity: [f64; 2],
    heading: f64,
    t0: f64,
}

impl Target {
    fn center(&self, t: f64) -> [f64; 2] {
        let dt = t - self.t0;
        [self.origin[0] + self.velocity[0] * dt, self.origin[1] + self.velocity[1] * dt]
    }
}

/// Radar pose in the world for a vehicle pose.
fn radar_pose(vehicle: &Pose2, extr: &RadarExtrinsics) -> Pose2 {
    let [x, y] = vehicle.transform([extr.x, extr.y]);
    Pose2::new(x, y, vehicle.heading + extr.theta)
}

fn to_radar(radar: &Pose2, world: [f64; 2]) -> [f64; 2] {
    let (s, c) = radar.heading.sin_cos();
    let dx = world[0] - radar.x;
    let dy = world[1] - radar.y;
    [c * dx + s * dy, -s * dx + c * dy]
}

fn in_fov(cfg: &SceneConfig, p: [f64; 2]) -> bool {
    let r = p[0].hypot(p[1]);
    let a = p[1].atan2(p[0]);
    r >= cfg.min_range && r <= cfg.max_range && a.abs() <= cfg.fov_half_angle
}

fn sample_normal(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    if std > 0.0 {
        Normal::new(mean, std).expect("std > 0").sample(rng)
    } else {
        mean
    }
}

fn sample_poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean > 0.0 {
        Poisson::new(mean).expect("mean > 0").sample(rng) as usize
    } else {
        0
    }
}

/// Two segments that switch on a frame instant, so integrating per-frame
/// odometry reproduces the true poses.
fn random_profile(cfg: &SceneConfig, rng: &mut ChaCha8Rng) -> Vec<EgoSegment> {
    let first = (cfg.frame_count() / 2) as f64 / cfg.frame_rate;
    [first, (cfg.duration - first).max(first)]
        .into_iter()
        .map(|duration| EgoSegment {
            duration,
            speed: rng.gen_range(cfg.ego_speed[0]..=cfg.ego_speed[1]),
            yaw_rate: if cfg.ego_yaw_rate_max > 0.0 {
                rng.gen_range(-cfg.ego_yaw_rate_max..=cfg.ego_yaw_rate_max)
            } else {
                0.0
            },
        })
        .collect()
}

/// Seed of the `index`-th sequence of a corpus.
pub fn sequence_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64 + 1)
}

/// `count` sequences named `{prefix}{index:03}`, each simulated from
/// [`sequence_seed`].
pub fn simulate_dataset(cfg: &SceneConfig, seed: u64, count: usize, prefix: &str) -> Result<Dataset> {
    let mut sequences = Vec::with_capacity(count);
    for i in 0..count {
        let sim = simulate_sequence(cfg, sequence_seed(seed, i))?;
        sequences.push(Sequence::new(format!("{prefix}{i:03}"), sim.frames, sim.extrinsics));
    }
    let mut ds = Dataset::new(sequences);
    ds.seed = Some(seed);
    Ok(ds)
}

/// Generates one labeled sequence. Deterministic given `(config, seed)`.
pub fn simulate_sequence(cfg: &SceneConfig, seed: u64) -> Result<SimulatedSequence> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extr = cfg.extrinsics;
    let profile = Profile {
        segments: if cfg.ego_profile.is_empty() {
            random_profile(cfg, &mut rng)
        } else {
            cfg.ego_profile.clone()
        },
    };

    let road = build_road(&profile, cfg.duration, cfg.max_range + 20.0, 20.0, 0.5);
    let mut landmarks = Vec::new();
    if cfg.landmark_density > 0.0 {
        let p_per_sample = (cfg.landmark_density * road.step).min(1.0);
        for center in &road.points {
            for side in [-1.0, 1.0] {
                if rng.gen_bool(p_per_sample) {
                    let lateral = side * (cfg.road_half_width + rng.gen_range(0.0..=cfg.landmark_scatter.max(1e-12)));
                    let along = rng.gen_range(-0.5..0.5) * road.step;
                    landmarks.push(center.transform([along, lateral]));
                }
            }
        }
    }

    let n_frames = cfg.frame_count();
    let mut frames = Vec::with_capacity(n_frames);
    let mut ego_states = Vec::with_capacity(n_frames);
    let mut poses = Vec::with_capacity(n_frames);
    let mut origins = Vec::with_capacity(n_frames);
    let mut target_log = Vec::with_capacity(n_frames);
    let mut targets: Vec<Option<Target>> = (0..cfg.moving_objects + cfg.pedestrians).map(|_| None).collect();
    let mut next_id: u32 = 1;
    let gt_threshold = cfg.gt_threshold();

    for k in 0..n_frames {
        let t = k as f64 / cfg.frame_rate;
        let ego = profile.state_at(t);
        let pose = profile.pose_at(t);
        let radar = radar_pose(&pose, &extr);
        let motion = vehicle_to_radar(ego, &extr);

        let mut points = Vec::new();
        let mut origin = Vec::new();
        let mut annotations = Vec::new();

        // landmarks
        for (li, lm) in landmarks.iter().enumerate() {
            let local = to_radar(&radar, *lm);
            if !in_fov(cfg, local) || !rng.gen_bool(cfg.landmark_detection_prob) {
                continue;
            }
            let azimuth = local[1].atan2(local[0]);
            let vr = static_radial_velocity(azimuth, motion);
            points.push(emit(cfg, &mut rng, local, vr, cfg.rcs_static));
            origin.push(PointOrigin::Landmark(li));
            annotations.push(None);
        }

        // moving targets
        let mut snapshots = Vec::new();
        for (si, slot) in targets.iter_mut().enumerate() {
            let visible = slot
                .as_ref()
                .is_some_and(|tg| in_fov(cfg, to_radar(&radar, tg.center(t))));
            if !visible {
                *slot = if si < cfg.moving_objects {
                    spawn_target(cfg, &road, &pose, &radar, t, &mut rng, next_id)
                } else {
                    spawn_pedestrian(cfg, &road, &pose, &radar, t, &mut rng, next_id)
                };
                if slot.is_some() {
                    next_id += 1;
                }
            }
            let Some(tg) = slot.as_ref() else { continue };
            let center = tg.center(t);
            snapshots.push(TargetSnapshot {
                id: tg.id,
                center: to_radar(&radar, center),
            });
            for p in target_points(cfg, tg, t, &radar, motion, &mut rng) {
                points.push(p);
                origin.push(PointOrigin::Target(tg.id));
                annotations.push(Some(tg.id));
            }
        }

        // clutter
        for _ in 0..sample_poisson(&mut rng, cfg.false_positive_rate) {
            let r = rng.gen_range(cfg.min_range..cfg.max_range);
            let a = rng.gen_range(-cfg.fov_half_angle..cfg.fov_half_angle);
            let vr = rng.gen_range(-cfg.doppler_max..cfg.doppler_max);
            let mut p = RadarPoint::new(r, a, vr);
            if cfg.with_rcs {
                p.rcs = Some(sample_normal(&mut rng, cfg.rcs_false_positive[0], cfg.rcs_false_positive[1]));
            }
            points.push(p);
            origin.push(PointOrigin::Clutter);
            annotations.push(None);
        }

        let gt = generate_gt_labels(&points, ego, &extr, gt_threshold, &annotations);
        frames.push(RadarFrame {
            timestamp: t,
            sensor_id: cfg.sensor_id,
            points,
            gt: Some(gt),
            odom: Some(ego),
        });
        ego_states.push(ego);
        poses.push(pose);
        origins.push(origin);
        target_log.push(snapshots);
    }

    let frames = apply_lifespan_filter(frames, cfg.min_lifespan);
    Ok(SimulatedSequence {
        frames,
        ego: ego_states,
        poses,
        origins,
        targets: target_log,
        landmarks,
        extrinsics: extr,
    })
}

fn emit(cfg: &SceneConfig, rng: &mut ChaCha8Rng, local: [f64; 2], vr_true: f64, rcs: [f64; 2]) -> RadarPoint {
    let range = local[0].hypot(local[1]);
    let azimuth = local[1].atan2(local[0]);
    let range_m = (range + sample_normal(rng, 0.0, cfg.noise_range)).max(0.0);
    let az_m = crate::point::normalize_azimuth(azimuth + sample_normal(rng, 0.0, cfg.noise_azimuth));
    let vr_m = vr_true + sample_normal(rng, 0.0, cfg.noise_radial_velocity);
    let mut p = RadarPoint::new(range_m, az_m, vr_m);
    if cfg.with_rcs {
        p.rcs = Some(sample_normal(rng, rcs[0], rcs[1]));
    }
    p
}

/// Detections of one target footprint in one frame.
fn target_points(
    cfg: &SceneConfig,
    tg: &Target,
    t: f64,
    radar: &Pose2,
    motion: RadarMotion,
    rng: &mut ChaCha8Rng,
) -> Vec<RadarPoint> {
    let center = tg.center(t);
    let n = sample_poisson(rng, tg.points);
    let (hs, hc) = tg.heading.sin_cos();
    // target velocity in radar coordinates
    let (rs, rc) = radar.heading.sin_cos();
    let v = tg.velocity;
    let v_local = [rc * v[0] + rs * v[1], -rs * v[0] + rc * v[1]];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.gen_range(-0.5..0.5) * tg.size[0];
        let w = rng.gen_range(-0.5..0.5) * tg.size[1];
        let world = [center[0] + hc * u - hs * w, center[1] + hs * u + hc * w];
        let local = to_radar(radar, world);
        if !in_fov(cfg, local) {
            continue;
        }
        let azimuth = local[1].atan2(local[0]);
        let (s, c) = azimuth.sin_cos();
        let vr = static_radial_velocity(azimuth, motion) + c * v_local[0] + s * v_local[1];
        out.push(emit(cfg, rng, local, vr, cfg.rcs_moving));
    }
    out
}

fn spawn_target(
    cfg: &SceneConfig,
    road: &Road,
    vehicle: &Pose2,
    radar: &Pose2,
    t: f64,
    rng: &mut ChaCha8Rng,
    id: u32,
) -> Option<Target> {
    let s_ego = road.nearest_index(vehicle) as f64 * road.step;
    for _ in 0..32 {
        let s = s_ego + rng.gen_range(0.0..cfg.max_range);
        let lane = cfg.lanes[rng.gen_range(0..cfg.lanes.len())];
        let center = road.along(s);
        let pos = Road::offset(&center, lane);
        if !in_fov(cfg, to_radar(radar, pos)) {
            continue;
        }
        let heading = if lane > 0.0 { center.heading + PI } else { center.heading };
        let speed = rng.gen_range(cfg.target_speed[0]..=cfg.target_speed[1]);
        return Some(Target {
            id,
            size: cfg.target_size,
            points: cfg.target_points,
            origin: pos,
            velocity: [speed * heading.cos(), speed * heading.sin()],
            heading,
            t0: t,
        });
    }
    None
}

fn spawn_pedestrian(
    cfg: &SceneConfig,
    road: &Road,
    vehicle: &Pose2,
    radar: &Pose2,
    t: f64,
    rng: &mut ChaCha8Rng,
    id: u32,
) -> Option<Target> {
    let s_ego = road.nearest_index(vehicle) as f64 * road.step;
    for _ in 0..32 {
        let s = s_ego + rng.gen_range(0.0..cfg.max_range);
        let lateral = rng.gen_range(-1.0..=1.0) * cfg.road_half_width;
        let pos = Road::offset(&road.along(s), lateral);
        if !in_fov(cfg, to_radar(radar, pos)) {
            continue;
        }
        let heading = rng.gen_range(-PI..PI);
        let speed = rng.gen_range(cfg.pedestrian_speed[0]..=cfg.pedestrian_speed[1]);
        return Some(Target {
            id,
            size: cfg.pedestrian_size,
            points: cfg.pedestrian_points,
            origin: pos,
            velocity: [speed * heading.cos(), speed * heading.sin()],
            heading,
            t0: t,
        });
    }
    None
}

/// Static ground-truth motion of the radar for each frame.
pub fn radar_motions(seq: &SimulatedSequence) -> Vec<RadarMotion> {
    seq.ego.iter().map(|e| vehicle_to_radar(*e, &seq.extrinsics)).collect()
}
