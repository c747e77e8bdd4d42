//! The learnable part: pointwise encoder, masked average pooling, GRU over
//! the frame vectors, skip-connected decoder and two sigmoid heads.

pub mod config;
pub mod file;
pub mod model;
pub mod params;
pub mod train;

pub use config::{ModelConfig, TrainConfig};
pub use file::{load_model, save_model};
pub use model::{forward, gradients, loss, Gradients, HeadOutputs, Mode, Sample};
pub use params::ModelParams;
pub use train::{train, EpochLog, TrainLog};

use crate::ego::{apply_update_heads, FrameInference, SolverConfig};
use crate::error::Result;
use crate::point::{FrameWindow, RadarExtrinsics, RadarFrame};

/// Inference on one window: head outputs, then both update heads. Solver
/// failures propagate.
pub fn infer_window(
    window: FrameWindow,
    params: &ModelParams,
    extr: &RadarExtrinsics,
    solver: &SolverConfig,
) -> Result<FrameInference> {
    let out = forward(params, &[window], Mode::Infer)?.pop().unwrap_or_default();
    Ok(apply_update_heads(
        &window.last().points,
        &out.static_ini,
        &out.moving_ini,
        extr,
        solver,
    )?)
}

/// Inference for every frame of a sequence. Early frames use the shorter
/// window of all frames so far; frames where the solver fails get no ego
/// estimate.
pub fn infer_sequence(
    frames: &[RadarFrame],
    params: &ModelParams,
    extr: &RadarExtrinsics,
    solver: &SolverConfig,
) -> Result<Vec<FrameInference>> {
    let t = params.config.window;
    let mut out = Vec::with_capacity(frames.len());
    for i in 0..frames.len() {
        let window = FrameWindow::new(&frames[(i + 1).saturating_sub(t)..=i]);
        let heads = forward(params, &[window], Mode::Infer)?.pop().unwrap_or_default();
        let points = &window.last().points;
        let inf = match apply_update_heads(points, &heads.static_ini, &heads.moving_ini, extr, solver) {
            Ok(inf) => inf,
            Err(e) => {
                log::debug!("frame {i}: {e}");
                FrameInference::without_motion(&heads.static_ini, &heads.moving_ini, solver)
            }
        };
        out.push(inf);
    }
    Ok(out)
}
