//! Trains the same network with a one-frame and an eight-frame window and
//! compares missed detections and trajectory error.
//!
//! cargo run --release --example window_length -- [train_sequences] [epochs]

use radar_egoseg::ego::SolverConfig;
use radar_egoseg::eval::{aggregate, evaluate_sequence, EvalConfig, EvalReport, FramePrediction};
use radar_egoseg::network::{infer_sequence, train, ModelConfig, TrainConfig};
use radar_egoseg::dataset::Dataset;
use radar_egoseg::sim::{simulate_dataset, SceneConfig};

fn run(window: usize, train_set: &Dataset, test_set: &Dataset, epochs: usize) -> radar_egoseg::Result<EvalReport> {
    let model = ModelConfig {
        window,
        ..ModelConfig::default()
    };
    let cfg = TrainConfig {
        max_epochs: epochs,
        window_stride: 4,
        ..TrainConfig::default()
    };
    let (params, _) = train(&train_set.sequences, &model, &cfg)?;
    let eval = EvalConfig::default();
    let mut reports = Vec::new();
    for seq in &test_set.sequences {
        let inf = infer_sequence(&seq.frames, &params, &seq.extrinsics, &SolverConfig::default())?;
        let preds: Vec<FramePrediction> =
            seq.frames.iter().zip(&inf).map(|(f, i)| FramePrediction::from_inference(f.timestamp, i)).collect();
        reports.push(evaluate_sequence(&seq.name, &seq.frames, &preds, &eval)?);
    }
    aggregate(reports, &eval)
}

fn main() -> radar_egoseg::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_train: usize = args.next().map_or(12, |s| s.parse().expect("sequence count"));
    let epochs: usize = args.next().map_or(4, |s| s.parse().expect("epochs"));
    // slow pedestrians are where the extra frames help most
    let scene = SceneConfig {
        duration: 20.0,
        pedestrians: 4,
        pedestrian_speed: [0.2, 1.0],
        ..SceneConfig::default()
    };
    let train_set = simulate_dataset(&scene, 1, n_train, "train")?;
    let test_set = simulate_dataset(&scene, 2, 3, "test")?;
    for window in [1, 8] {
        let r = run(window, &train_set, &test_set, epochs)?;
        println!(
            "T={window}: MDR {:.4} FDR {:.4} F1 {:.3} RTE50 {:?} m",
            r.mdr.unwrap_or(f64::NAN),
            r.fdr.unwrap_or(f64::NAN),
            r.f1.unwrap_or(f64::NAN),
            r.rte_50_m
        );
    }
    Ok(())
}
