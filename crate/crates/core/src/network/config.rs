use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layer widths of the segmentation network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Features per point: 3 (range, azimuth, v_r) or 4 (+ RCS).
    pub input_features: usize,
    pub encoder: [usize; 3],
    pub gru_hidden: usize,
    pub decoder: [usize; 3],
    /// Widths of the three layers of each head; the last must be 1.
    pub head: [usize; 3],
    /// Dropout rate after the second decoder layer.
    pub dropout: f64,
    /// Frames per input window.
    pub window: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_features: 4,
            encoder: [32, 64, 128],
            gru_hidden: 128,
            decoder: [128, 64, 32],
            head: [32, 16, 1],
            dropout: 0.3,
            window: 8,
        }
    }
}

impl ModelConfig {
    /// A very small network for gradient checks and quick experiments.
    pub fn tiny() -> Self {
        Self {
            input_features: 4,
            encoder: [4, 4, 4],
            gru_hidden: 8,
            decoder: [4, 4, 4],
            head: [4, 4, 1],
            dropout: 0.3,
            window: 3,
        }
    }

    /// Width of the per-point decoder input: raw features, the first two
    /// encoder activations and the recurrent state.
    pub fn decoder_input(&self) -> usize {
        self.input_features + self.encoder[0] + self.encoder[1] + self.gru_hidden
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=4).contains(&self.input_features) {
            return Err(Error::config("model.input_features", "must be 3 or 4"));
        }
        let widths = self.encoder.iter().chain(&self.decoder).chain(&self.head[..2]);
        if widths.copied().any(|w| w == 0) || self.gru_hidden == 0 {
            return Err(Error::config("model", "layer widths must be positive"));
        }
        if self.head[2] != 1 {
            return Err(Error::config("model.head", "last head layer must have width 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config("model.dropout", "must lie in [0, 1)"));
        }
        if self.window == 0 {
            return Err(Error::config("model.window", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a new best training loss.
    pub early_stop_patience: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    /// Epochs without improvement before the learning rate decays.
    pub lr_patience: usize,
    pub seed: u64,
    /// Use every n-th window of each sequence.
    pub window_stride: usize,
    /// Multiplier on the sample weight of windows whose last frame has fewer
    /// than `min_static_points` static points.
    pub low_static_weight: f64,
    pub min_static_points: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            max_epochs: 400,
            early_stop_patience: 10,
            learning_rate: 0.001,
            lr_decay: 0.5,
            lr_patience: 5,
            seed: 0,
            window_stride: 1,
            low_static_weight: 0.25,
            min_static_points: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("train.batch_size", self.batch_size > 0),
            ("train.max_epochs", self.max_epochs > 0),
            ("train.early_stop_patience", self.early_stop_patience > 0),
            ("train.learning_rate", self.learning_rate > 0.0),
            ("train.lr_decay", self.lr_decay > 0.0 && self.lr_decay < 1.0),
            ("train.lr_patience", self.lr_patience > 0),
            ("train.window_stride", self.window_stride > 0),
            ("train.low_static_weight", self.low_static_weight >= 0.0),
        ];
        for (key, ok) in checks {
            if !ok {
                return Err(Error::config(key, "out of range"));
            }
        }
        Ok(())
    }
}
