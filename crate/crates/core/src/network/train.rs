use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, TrainConfig};
use super::model::{gradients, Sample};
use super::params::ModelParams;
use crate::dataset::Sequence;
use crate::error::{Error, Result};
use crate::point::{FrameWindow, PointClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
    pub best_loss: f64,
    pub windows: usize,
    pub seconds: f64,
}

/// Halves (by `factor`) the learning rate once the loss has failed to improve
/// for `patience` consecutive epochs.
#[derive(Debug, Clone)]
pub struct PlateauSchedule {
    pub lr: f64,
    factor: f64,
    patience: usize,
    best: f64,
    stale: usize,
}

impl PlateauSchedule {
    pub fn new(lr: f64, factor: f64, patience: usize) -> Self {
        Self {
            lr,
            factor,
            patience,
            best: f64::INFINITY,
            stale: 0,
        }
    }

    pub fn step(&mut self, loss: f64) {
        if loss < self.best {
            self.best = loss;
            self.stale = 0;
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                self.lr *= self.factor;
                self.stale = 0;
            }
        }
    }
}

/// Adam with the usual defaults.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, weights: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..weights.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            weights[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Per-feature mean and standard deviation over every point of the frames.
pub fn feature_statistics<'a>(
    frames: impl IntoIterator<Item = &'a crate::point::RadarFrame>,
    m: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut n = 0usize;
    let mut sum = vec![0.0; m];
    let mut sq = vec![0.0; m];
    for f in frames {
        for p in &f.points {
            let x = p.features(m);
            for j in 0..m {
                sum[j] += x[j];
                sq[j] += x[j] * x[j];
            }
            n += 1;
        }
    }
    if n == 0 {
        return (vec![0.0; m], vec![1.0; m]);
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let std = (0..m)
        .map(|j| {
            let var = (sq[j] / nf - mean[j] * mean[j]).max(0.0);
            if var > 1e-12 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    (mean, std)
}

/// Training windows of every sequence with their sample weights.
pub fn training_samples<'a>(sequences: &'a [Sequence], model: &ModelConfig, train: &TrainConfig) -> Result<Vec<Sample<'a>>> {
    let mut samples = Vec::new();
    for seq in sequences {
        if seq.frames.len() < model.window {
            continue;
        }
        for (k, frames) in seq.frames.windows(model.window).enumerate() {
            if k % train.window_stride != 0 {
                continue;
            }
            let window = FrameWindow::new(frames);
            let gt = window.last().gt.as_ref().ok_or(Error::MissingGroundTruth {
                frame: k + model.window - 1,
            })?;
            let mut weight = seq.sample_weight;
            if gt.count(PointClass::Static) < train.min_static_points {
                weight *= train.low_static_weight;
            }
            samples.push(Sample {
                window,
                sample_weight: weight,
            });
        }
    }
    Ok(samples)
}

/// Trains from a seeded initialization and returns the parameters of the
/// epoch with the lowest training loss.
pub fn train(sequences: &[Sequence], model: &ModelConfig, config: &TrainConfig) -> Result<(ModelParams, TrainLog)> {
    model.validate()?;
    config.validate()?;
    let samples = training_samples(sequences, model, config)?;
    if samples.is_empty() {
        return Err(Error::Empty("training windows"));
    }
    let mut params = ModelParams::init(model, config.seed);
    let (mean, std) = feature_statistics(sequences.iter().flat_map(|s| &s.frames), model.input_features);
    params.set_input_normalization(&mean, &std);
    train_from(params, &samples, config)
}

/// Continues training `params` on prepared samples.
pub fn train_from(mut params: ModelParams, samples: &[Sample], config: &TrainConfig) -> Result<(ModelParams, TrainLog)> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_7a11);
    let mut adam = Adam::new(params.weights.len());
    let mut schedule = PlateauSchedule::new(config.learning_rate, config.lr_decay, config.lr_patience);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut log = TrainLog {
        best_loss: f64::INFINITY,
        windows: samples.len(),
        ..TrainLog::default()
    };
    let mut best = params.clone();
    let mut since_best = 0;

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let lr = schedule.lr;
        let mut sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Sample> = chunk.iter().map(|&i| samples[i]).collect();
            let g = gradients(&params, &batch, rng.gen(), None)?;
            if !g.loss.is_finite() || g.weights.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { epoch, loss: g.loss });
            }
            sum += g.loss * batch.len() as f64;
            adam.step(&mut params.weights, &g.weights, lr);
            params.buffers = g.buffers;
        }
        let loss = sum / samples.len() as f64;
        if !loss.is_finite() || !params.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        log.epochs.push(EpochLog { epoch, loss, lr });
        log::info!("epoch {epoch}: loss {loss:.5} lr {lr:.2e}");
        if loss < log.best_loss {
            log.best_loss = loss;
            log.best_epoch = epoch;
            best = params.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.early_stop_patience {
                log::info!("no improvement for {since_best} epochs, stopping");
                break;
            }
        }
        schedule.step(loss);
    }
    log.seconds = start.elapsed().as_secs_f64();
    Ok((best, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_halves_after_patience() {
        let mut s = PlateauSchedule::new(1.0, 0.5, 5);
        s.step(1.0);
        for _ in 0..4 {
            s.step(1.0);
            assert_eq!(s.lr, 1.0);
        }
        s.step(1.0);
        assert_eq!(s.lr, 0.5);
        s.step(0.5);
        assert_eq!(s.lr, 0.5);
    }

    #[test]
    fn adam_moves_against_gradient() {
        let mut a = Adam::new(2);
        let mut w = vec![1.0, -1.0];
        a.step(&mut w, &[2.0, -3.0], 0.1);
        assert!((w[0] - 0.9).abs() < 1e-6 && (w[1] + 0.9).abs() < 1e-6);
    }
}
