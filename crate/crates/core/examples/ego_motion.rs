//! Ego-motion from one frame: plain least squares on all points, the
//! weighted solve with oracle static weights, and the Gaussian reweighting.

use radar_egoseg::ego::{
    apply_update_heads, radar_to_vehicle, solve_wlsq, static_gate_residual, static_weight_peak, SolverConfig,
};
use radar_egoseg::sim::{simulate_sequence, SceneConfig};
use radar_egoseg::PointClass;

fn main() -> radar_egoseg::Result<()> {
    let mut scene = SceneConfig::default();
    scene.duration = 3.0;
    let seq = simulate_sequence(&scene, 5)?;
    let solver = SolverConfig::default();
    println!(
        "sigma {} m/s: peak weight {:.2}, static gate at |residual| {:.4} m/s",
        solver.sigma,
        static_weight_peak(solver.sigma),
        static_gate_residual(solver.sigma, solver.label_threshold)
    );

    let k = seq.frames.len() / 2;
    let frame = &seq.frames[k];
    let truth = seq.ego[k];
    let gt = frame.gt.as_ref().unwrap();
    let extr = &seq.extrinsics;

    let uniform = vec![1.0; frame.len()];
    let oracle: Vec<f64> = gt.class.iter().map(|c| f64::from(u8::from(*c == PointClass::Static))).collect();
    let plain = radar_to_vehicle(solve_wlsq(&frame.points, &uniform, solver.condition_limit)?, extr)?;
    let masked = radar_to_vehicle(solve_wlsq(&frame.points, &oracle, solver.condition_limit)?, extr)?;
    // a mostly right segmentation: moving points keep a little weight
    let guess: Vec<f64> = oracle.iter().map(|&w| if w > 0.0 { 0.9 } else { 0.01 }).collect();
    let soft = radar_to_vehicle(solve_wlsq(&frame.points, &guess, solver.condition_limit)?, extr)?;
    let moving_guess: Vec<f64> = guess.iter().map(|w| 1.0 - w).collect();
    let refined = apply_update_heads(&frame.points, &guess, &moving_guess, extr, &solver)?;

    println!("truth        v {:7.3} m/s  omega {:8.4} rad/s", truth.speed, truth.yaw_rate);
    println!("all points   v {:7.3} m/s  omega {:8.4} rad/s", plain.speed, plain.yaw_rate);
    println!("static only  v {:7.3} m/s  omega {:8.4} rad/s", masked.speed, masked.yaw_rate);
    println!("soft weights v {:7.3} m/s  omega {:8.4} rad/s", soft.speed, soft.yaw_rate);
    if let Some(e) = refined.ego {
        println!("reweighted   v {:7.3} m/s  omega {:8.4} rad/s", e.speed, e.yaw_rate);
    }
    let moving = refined.labels.iter().filter(|c| **c == PointClass::Moving).count();
    println!("{} points, {} labeled moving after reweighting", frame.len(), moving);
    Ok(())
}
