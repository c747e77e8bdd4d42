//! Trains the segmentation network on simulated sequences, saves it, and
//! scores it on held-out sequences.
//!
//! cargo run --release --example train_segmenter -- [train_sequences] [epochs] [model.bin]

use radar_egoseg::eval::{aggregate, evaluate_sequence, EvalConfig, FramePrediction};
use radar_egoseg::network::{infer_sequence, load_model, save_model, train, ModelConfig, TrainConfig};
use radar_egoseg::ego::SolverConfig;
use radar_egoseg::sim::{simulate_dataset, SceneConfig};

fn main() -> radar_egoseg::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_train: usize = args.next().map_or(12, |s| s.parse().expect("sequence count"));
    let epochs: usize = args.next().map_or(4, |s| s.parse().expect("epochs"));
    let path = args.next().unwrap_or_else(|| "segmenter.bin".into());

    let scene = SceneConfig::default();
    let train_set = simulate_dataset(&scene, 1, n_train, "train")?;
    let test_set = simulate_dataset(&scene, 2, 3, "test")?;

    let model = ModelConfig::default();
    let cfg = TrainConfig {
        max_epochs: epochs,
        window_stride: 4,
        ..TrainConfig::default()
    };
    let (params, log) = train(&train_set.sequences, &model, &cfg)?;
    println!("{} parameters, {} windows, {:.1} s", params.parameter_count(), log.windows, log.seconds);
    for e in &log.epochs {
        println!("epoch {:3}  loss {:.5}  lr {:.2e}", e.epoch, e.loss, e.lr);
    }
    save_model(&params, path.as_ref())?;
    let params = load_model(path.as_ref())?;

    let solver = SolverConfig::default();
    let eval = EvalConfig::default();
    let mut reports = Vec::new();
    for seq in &test_set.sequences {
        let inf = infer_sequence(&seq.frames, &params, &seq.extrinsics, &solver)?;
        let preds: Vec<FramePrediction> =
            seq.frames.iter().zip(&inf).map(|(f, i)| FramePrediction::from_inference(f.timestamp, i)).collect();
        reports.push(evaluate_sequence(&seq.name, &seq.frames, &preds, &eval)?);
    }
    let r = aggregate(reports, &eval)?;
    println!(
        "held out: F1 {:.3} IoU {:.3} RTE50 {:?} m S-RMSE {:.2} cm/s",
        r.f1.unwrap_or(0.0),
        r.iou.unwrap_or(0.0),
        r.rte_50_m,
        r.s_rmse_vx_cm_s
    );
    Ok(())
}
