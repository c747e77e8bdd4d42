//! Weighted least-squares radar motion, the two weight-update heads and the
//! radar/vehicle velocity transforms.
//!
//! A static detection at azimuth `α` observes `v_r = -(v_x cos α + v_y sin α)`
//! where `(v_x, v_y)` is the radar velocity in its own frame. The residual
//! `cos α v_x + sin α v_y + v_r` is zero for noise-free static points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::point::{EgoMotionState, PointClass, PointWeights, RadarExtrinsics, RadarMotion, RadarPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Std of the Gaussian Doppler error model, m/s.
    pub sigma: f64,
    /// Static weight above which a point's moving weight is zeroed.
    pub c_static: f64,
    /// Threshold applied to the updated weights to produce labels.
    pub label_threshold: f64,
    /// Largest accepted condition number of the 2x2 normal matrix.
    pub condition_limit: f64,
    /// Number of solve -> static-weight-update cycles.
    pub iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 0.013,
            c_static: 0.1,
            label_threshold: 0.1,
            condition_limit: 1e8,
            iterations: 1,
        }
    }
}

/// Doppler residual of one detection under a radar motion hypothesis.
#[inline]
pub fn doppler_residual(point: &RadarPoint, motion: RadarMotion) -> f64 {
    let (s, c) = point.azimuth.sin_cos();
    c * motion.vx + s * motion.vy + point.radial_velocity
}

/// Radial velocity a static target at `azimuth` shows to a radar moving with `motion`.
#[inline]
pub fn static_radial_velocity(azimuth: f64, motion: RadarMotion) -> f64 {
    let (s, c) = azimuth.sin_cos();
    -(c * motion.vx + s * motion.vy)
}

/// Solves the normal equations `(AᵀWA) v = AᵀWD` with `A = [cos α, sin α]`
/// and `D = -v_r`.
pub fn solve_wlsq(
    points: &[RadarPoint],
    weights: &[f64],
    condition_limit: f64,
) -> Result<RadarMotion, SolverError> {
    assert_eq!(points.len(), weights.len(), "one weight per point");
    let weighted = weights.iter().filter(|&&w| w > 0.0).count();
    if weighted < 2 {
        return Err(SolverError::Underdetermined { weighted });
    }
    // Normalizing by the largest weight keeps the solution independent of the
    // overall weight scale and avoids underflow for tiny density weights.
    let w_max = weights.iter().copied().fold(0.0_f64, f64::max);

    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, &w) in points.iter().zip(weights) {
        if !(w > 0.0) {
            continue;
        }
        let w = w / w_max;
        let (s, c) = p.azimuth.sin_cos();
        a11 += w * c * c;
        a12 += w * c * s;
        a22 += w * s * s;
        b1 -= w * c * p.radial_velocity;
        b2 -= w * s * p.radial_velocity;
    }

    let half_trace = 0.5 * (a11 + a22);
    let spread = (0.25 * (a11 - a22).powi(2) + a12 * a12).sqrt();
    let (l_max, l_min) = (half_trace + spread, half_trace - spread);
    let condition = if l_min > 0.0 { l_max / l_min } else { f64::INFINITY };
    if !(condition <= condition_limit) {
        return Err(SolverError::IllConditioned {
            condition,
            limit: condition_limit,
        });
    }

    let det = a11 * a22 - a12 * a12;
    Ok(RadarMotion {
        vx: (a22 * b1 - a12 * b2) / det,
        vy: (a11 * b2 - a12 * b1) / det,
    })
}

/// Weighted sum of squared Doppler residuals.
pub fn weighted_residual(points: &[RadarPoint], weights: &[f64], motion: RadarMotion) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * doppler_residual(p, motion).powi(2))
        .sum()
}

/// Gaussian density of each point's Doppler residual. Unnormalized: the peak
/// is `1 / (σ √(2π))`.
pub fn update_static_weights(points: &[RadarPoint], motion: RadarMotion, sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let peak = static_weight_peak(sigma);
    let denom = 2.0 * sigma * sigma;
    points
        .iter()
        .map(|p| peak * (-doppler_residual(p, motion).powi(2) / denom).exp())
        .collect()
}

pub fn static_weight_peak(sigma: f64) -> f64 {
    1.0 / (sigma * (2.0 * PI).sqrt())
}

/// Residual magnitude at which the updated static weight equals `threshold`.
pub fn static_gate_residual(sigma: f64, threshold: f64) -> f64 {
    let peak = static_weight_peak(sigma);
    if threshold >= peak {
        return 0.0;
    }
    sigma * (2.0 * (peak / threshold).ln()).sqrt()
}

/// A point cannot be both static and moving: keep the moving weight only
/// where the updated static weight is at most `c_static`.
pub fn gate_moving_weights(static_new: &[f64], moving_ini: &[f64], c_static: f64) -> Vec<f64> {
    assert_eq!(static_new.len(), moving_ini.len(), "weight vectors differ in length");
    static_new
        .iter()
        .zip(moving_ini)
        .map(|(&s, &m)| if s <= c_static { m } else { 0.0 })
        .collect()
}

/// Vehicle speed and yaw rate from the radar velocity and the mounting pose.
pub fn radar_to_vehicle(motion: RadarMotion, extr: &RadarExtrinsics) -> Result<EgoMotionState, SolverError> {
    if extr.x == 0.0 {
        return Err(SolverError::DegenerateExtrinsics);
    }
    let (s, c) = extr.theta.sin_cos();
    let yaw_rate = (motion.vy * c + motion.vx * s) / extr.x;
    let speed = motion.vx * c - motion.vy * s + extr.y * yaw_rate;
    Ok(EgoMotionState { speed, yaw_rate })
}

/// Radar velocity in the radar frame for a vehicle moving without side slip.
pub fn vehicle_to_radar(ego: EgoMotionState, extr: &RadarExtrinsics) -> RadarMotion {
    let along = ego.speed - ego.yaw_rate * extr.y;
    let across = ego.yaw_rate * extr.x;
    let (s, c) = extr.theta.sin_cos();
    RadarMotion {
        vx: c * along + s * across,
        vy: -s * along + c * across,
    }
}

/// Output of the static and moving update heads for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInference {
    pub labels: Vec<PointClass>,
    pub weights: PointWeights,
    /// Radar motion used to refresh the static weights.
    pub radar_motion: Option<RadarMotion>,
    pub ego: Option<EgoMotionState>,
}

impl FrameInference {
    /// Labels for a frame where no radar motion could be estimated: static
    /// weights stay at zero and the moving head passes through ungated.
    pub fn without_motion(static_ini: &[f64], moving_ini: &[f64], config: &SolverConfig) -> Self {
        let static_new = vec![0.0; static_ini.len()];
        let moving_new = gate_moving_weights(&static_new, moving_ini, config.c_static);
        let labels = label_points(&static_new, &moving_new, config.label_threshold);
        Self {
            labels,
            weights: PointWeights {
                static_ini: static_ini.to_vec(),
                static_new,
                moving_ini: moving_ini.to_vec(),
                moving_new,
            },
            radar_motion: None,
            ego: None,
        }
    }
}

/// STATIC above the threshold on the updated static weight, MOVING above the
/// threshold on the gated moving weight, FALSE_POSITIVE otherwise.
pub fn label_points(static_new: &[f64], moving_new: &[f64], threshold: f64) -> Vec<PointClass> {
    static_new
        .iter()
        .zip(moving_new)
        .map(|(&s, &m)| {
            if s > threshold {
                PointClass::Static
            } else if m > threshold {
                PointClass::Moving
            } else {
                PointClass::FalsePositive
            }
        })
        .collect()
}

/// Runs both update heads on the initial head outputs of one frame.
///
/// The first solve uses the initial static weights; failures there propagate.
/// Each iteration refreshes the static weights from the current motion and
/// re-solves with them; the ego-motion comes from the last successful solve.
pub fn apply_update_heads(
    points: &[RadarPoint],
    static_ini: &[f64],
    moving_ini: &[f64],
    extr: &RadarExtrinsics,
    config: &SolverConfig,
) -> Result<FrameInference, SolverError> {
    let mut motion = solve_wlsq(points, static_ini, config.condition_limit)?;
    let mut static_new = update_static_weights(points, motion, config.sigma);
    let mut ego_motion = motion;
    for it in 0..config.iterations.max(1) {
        if it > 0 {
            static_new = update_static_weights(points, motion, config.sigma);
        }
        match solve_wlsq(points, &static_new, config.condition_limit) {
            Ok(m) => {
                ego_motion = m;
                motion = m;
            }
            Err(_) => break,
        }
    }
    let moving_new = gate_moving_weights(&static_new, moving_ini, config.c_static);
    let labels = label_points(&static_new, &moving_new, config.label_threshold);
    let ego = radar_to_vehicle(ego_motion, extr)?;
    Ok(FrameInference {
        labels,
        weights: PointWeights {
            static_ini: static_ini.to_vec(),
            static_new,
            moving_ini: moving_ini.to_vec(),
            moving_new,
        },
        radar_motion: Some(ego_motion),
        ego: Some(ego),
    })
}
