//! Clusters moving points into instances and matches them to ground truth.

use radar_egoseg::instance::{associate, dbscan, moving_instances, ClusterConfig};
use radar_egoseg::lap::{assignment_cost, solve_assignment};
use radar_egoseg::sim::{simulate_sequence, SceneConfig};
use radar_egoseg::PointClass;

fn main() -> radar_egoseg::Result<()> {
    let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
    let a = solve_assignment(&cost);
    println!("assignment {:?}, cost {}", a, assignment_cost(&cost, &a));

    let pts = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [10.0, 10.0], [10.4, 10.0], [30.0, 0.0]];
    println!("dbscan labels {:?}", dbscan(&pts, 1.0, 2));

    let mut scene = SceneConfig::default();
    scene.duration = 4.0;
    let seq = simulate_sequence(&scene, 2)?;
    let cfg = ClusterConfig::default();
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (f, targets) in seq.frames.iter().zip(&seq.targets) {
        let gt = f.gt.as_ref().unwrap();
        let found = moving_instances(&f.points, &gt.class, &cfg);
        // degrade the labels: drop every third moving point
        let mut noisy = gt.class.clone();
        for (i, c) in noisy.iter_mut().enumerate() {
            if *c == PointClass::Moving && i % 3 == 0 {
                *c = PointClass::FalsePositive;
            }
        }
        let m = associate(&found, &moving_instances(&f.points, &noisy, &cfg), cfg.gate);
        tp += m.tp;
        fp += m.fp;
        fn_ += m.fn_;
        if f.timestamp == 0.0 {
            println!("first frame: {} targets in view, {} ground-truth instances", targets.len(), found.len());
        }
    }
    println!("degraded labels: tp {tp} fp {fp} fn {fn_}");
    Ok(())
}
