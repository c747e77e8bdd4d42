//! Ground-truth labeling from odometry and instance annotations, and the
//! lifespan rule that demotes short-lived movers.

use radar_egoseg::commands::relabel_sequence;
use radar_egoseg::labels::instance_lifespans;
use radar_egoseg::sim::{simulate_sequence, SceneConfig};
use radar_egoseg::PointClass;

fn main() -> radar_egoseg::Result<()> {
    let mut scene = SceneConfig::default();
    scene.duration = 10.0;
    let seq = simulate_sequence(&scene, 11)?;

    // keep the annotations, forget the classes
    let mut stripped = seq.frames.clone();
    for f in &mut stripped {
        if let Some(gt) = &mut f.gt {
            gt.class.fill(PointClass::FalsePositive);
        }
    }
    let spans = instance_lifespans(&seq.frames);
    let shortest = spans.values().copied().min().unwrap_or(0);
    println!("instance lifespans in frames: {:?}", {
        let mut v: Vec<_> = spans.into_iter().collect();
        v.sort();
        v
    });
    for min_lifespan in [1, scene.min_lifespan, shortest + 1] {
        let relabeled = relabel_sequence(&stripped, None, &seq.extrinsics, scene.gt_threshold(), min_lifespan)?;
        let spans = instance_lifespans(&relabeled);
        let moving: usize = relabeled.iter().map(|f| f.gt.as_ref().unwrap().count(PointClass::Moving)).sum();
        let same = relabeled.iter().zip(&seq.frames).all(|(a, b)| a.gt == b.gt);
        println!(
            "min lifespan {min_lifespan:2}: {} instances, {moving} moving points, identical to simulator: {same}",
            spans.len()
        );
    }

    let mut no_odom = stripped;
    no_odom[4].odom = None;
    match relabel_sequence(&no_odom, None, &seq.extrinsics, scene.gt_threshold(), scene.min_lifespan) {
        Err(e) => println!("without odometry: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
