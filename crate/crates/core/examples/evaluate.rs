//! Scores predictions: ground truth recast as predictions scores perfectly,
//! and a perturbed copy shows how each metric reacts.

use radar_egoseg::eval::{aggregate, evaluate_sequence, EvalConfig, FramePrediction};
use radar_egoseg::metrics::f1_from_rates;
use radar_egoseg::sim::{simulate_sequence, SceneConfig};
use radar_egoseg::PointClass;

fn main() -> radar_egoseg::Result<()> {
    let scene = SceneConfig::default();
    let seq = simulate_sequence(&scene, 8)?;
    let cfg = EvalConfig::default();
    let perfect: Vec<FramePrediction> = seq.frames.iter().filter_map(FramePrediction::from_ground_truth).collect();
    let r = aggregate(vec![evaluate_sequence("perfect", &seq.frames, &perfect, &cfg)?], &cfg)?;
    println!("perfect:   F1 {:?} IoU {:?} RTE50 {:?}", r.f1, r.iou, r.rte_50_m);

    let mut worse = perfect.clone();
    for (i, p) in worse.iter_mut().enumerate() {
        if let Some(ego) = &mut p.ego {
            ego[0] += 0.05;
            ego[1] += 0.002;
        }
        if i % 10 == 0 {
            p.ego = None;
        }
        // forget the moving label of every other frame
        if i % 2 == 1 {
            for l in &mut p.labels {
                if *l == PointClass::Moving.code() {
                    *l = PointClass::FalsePositive.code();
                }
            }
        }
    }
    let r = aggregate(vec![evaluate_sequence("worse", &seq.frames, &worse, &cfg)?], &cfg)?;
    println!(
        "perturbed: FDR {:.3} MDR {:.3} F1 {:.3} IoU {:.3} RTE50 {:.2} m",
        r.fdr.unwrap_or(f64::NAN),
        r.mdr.unwrap_or(f64::NAN),
        r.f1.unwrap_or(f64::NAN),
        r.iou.unwrap_or(f64::NAN),
        r.rte_50_m.unwrap_or(f64::NAN)
    );
    println!(
        "S-RMSE {:.2} cm/s {:.3} deg/s over {} frames",
        r.s_rmse_vx_cm_s, r.s_rmse_omega_deg_s, r.per_sequence[0].frames
    );
    println!("F1 from FDR 6.4% and MDR 7.6%: {:.3}", f1_from_rates(0.064, 0.076));
    Ok(())
}
