//! Ground-truth labeling from recorded vehicle motion and moving-object
//! annotations, plus the minimum-lifespan rule for moving instances.

use std::collections::HashMap;

use crate::ego::{doppler_residual, vehicle_to_radar};
use crate::point::{EgoMotionState, GroundTruthLabels, PointClass, RadarExtrinsics, RadarFrame, RadarPoint};

/// Default minimum number of frames a moving instance must be visible in.
pub const DEFAULT_MIN_LIFESPAN: usize = 5;

/// Labels one frame.
///
/// A point is STATIC when its Doppler residual under the recorded motion is
/// within `residual_threshold`. Annotated points (`Some(instance)`) that are
/// not static are MOVING; a point that would be both is STATIC. Everything
/// else is a FALSE_POSITIVE.
pub fn generate_gt_labels(
    points: &[RadarPoint],
    ego: EgoMotionState,
    extr: &RadarExtrinsics,
    residual_threshold: f64,
    annotations: &[Option<u32>],
) -> GroundTruthLabels {
    assert_eq!(points.len(), annotations.len(), "one annotation per point");
    let motion = vehicle_to_radar(ego, extr);
    let mut labels = GroundTruthLabels {
        class: Vec::with_capacity(points.len()),
        instance: Vec::with_capacity(points.len()),
    };
    for (p, ann) in points.iter().zip(annotations) {
        let (class, inst) = if doppler_residual(p, motion).abs() <= residual_threshold {
            (PointClass::Static, None)
        } else if let Some(id) = ann {
            (PointClass::Moving, Some(*id))
        } else {
            (PointClass::FalsePositive, None)
        };
        labels.class.push(class);
        labels.instance.push(inst);
    }
    labels
}

/// Number of frames each moving instance appears in.
pub fn instance_lifespans(frames: &[RadarFrame]) -> HashMap<u32, usize> {
    let mut spans = HashMap::new();
    for f in frames {
        let Some(gt) = &f.gt else { continue };
        let mut seen: Vec<u32> = gt
            .class
            .iter()
            .zip(&gt.instance)
            .filter_map(|(c, i)| (*c == PointClass::Moving).then_some(*i).flatten())
            .collect();
        seen.sort_unstable();
        seen.dedup();
        for id in seen {
            *spans.entry(id).or_insert(0) += 1;
        }
    }
    spans
}

/// Relabels moving instances seen in fewer than `min_frames` frames as false
/// positives. Such points already failed the static test when they were
/// labeled moving, so they cannot become static here.
pub fn apply_lifespan_filter(mut frames: Vec<RadarFrame>, min_frames: usize) -> Vec<RadarFrame> {
    let spans = instance_lifespans(&frames);
    for f in &mut frames {
        let Some(gt) = &mut f.gt else { continue };
        for (c, inst) in gt.class.iter_mut().zip(gt.instance.iter_mut()) {
            if *c != PointClass::Moving {
                continue;
            }
            let short = inst.map_or(true, |id| spans.get(&id).copied().unwrap_or(0) < min_frames);
            if short {
                *c = PointClass::FalsePositive;
                *inst = None;
            }
        }
    }
    frames
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ego::static_radial_velocity;

    fn ext() -> RadarExtrinsics {
        RadarExtrinsics::new(3.0, 0.5, 0.2).unwrap()
    }

    #[test]
    fn labeling_rules() {
        let ego = EgoMotionState::new(10.0, 0.05);
        let m = vehicle_to_radar(ego, &ext());
        let a = 0.4;
        let vr0 = static_radial_velocity(a, m);
        let pts = [
            RadarPoint::new(10.0, a, vr0),
            RadarPoint::new(10.0, a, vr0 + 3.0),
            RadarPoint::new(10.0, a, vr0),
            RadarPoint::new(10.0, a, vr0 - 3.0),
        ];
        let gt = generate_gt_labels(&pts, ego, &ext(), 0.039, &[None, Some(4), Some(5), None]);
        assert_eq!(
            gt.class,
            vec![
                PointClass::Static,
                PointClass::Moving,
                PointClass::Static,
                PointClass::FalsePositive
            ]
        );
        assert_eq!(gt.instance, vec![None, Some(4), None, None]);
    }

    fn frame_with(ids: &[Option<u32>], t: f64) -> RadarFrame {
        let mut f = RadarFrame::new(t, vec![RadarPoint::new(5.0, 0.0, 1.0); ids.len()]);
        f.gt = Some(GroundTruthLabels {
            class: ids
                .iter()
                .map(|i| if i.is_some() { PointClass::Moving } else { PointClass::FalsePositive })
                .collect(),
            instance: ids.to_vec(),
        });
        f
    }

    fn seq() -> Vec<RadarFrame> {
        // instance 1 lives 4 frames, instance 2 lives 5 frames
        (0..6)
            .map(|k| {
                let mut ids = vec![];
                if k < 4 {
                    ids.push(Some(1));
                }
                if k >= 1 {
                    ids.push(Some(2));
                    ids.push(Some(2));
                }
                frame_with(&ids, k as f64)
            })
            .collect()
    }

    #[test]
    fn lifespan_boundary() {
        let spans = instance_lifespans(&seq());
        assert_eq!(spans[&1], 4);
        assert_eq!(spans[&2], 5);
        let out = apply_lifespan_filter(seq(), 5);
        let spans = instance_lifespans(&out);
        assert!(!spans.contains_key(&1));
        assert_eq!(spans[&2], 5);
        let gt0 = out[0].gt.as_ref().unwrap();
        assert_eq!(gt0.class, vec![PointClass::FalsePositive]);
        assert_eq!(gt0.instance, vec![None]);
    }

    #[test]
    fn min_lifespan_one_is_identity() {
        assert_eq!(apply_lifespan_filter(seq(), 1), seq());
    }
}
