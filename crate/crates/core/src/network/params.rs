//! Flat parameter storage with a named layout.
//!
//! Learnable weights live in one `Vec<f64>` and non-learnable state (batch
//! norm running statistics, input normalization) in another. Both are
//! addressed through [`Slot`]s computed from the [`ModelConfig`], so
//! gradients and optimizer moments share the weight layout.

use ndarray::{ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::config::ModelConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Slot {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }

    pub fn mat<'a>(&self, data: &'a [f64]) -> ArrayView2<'a, f64> {
        ArrayView2::from_shape((self.rows, self.cols), &data[self.range()]).expect("slot shape")
    }

    pub fn mat_mut<'a>(&self, data: &'a mut [f64]) -> ArrayViewMut2<'a, f64> {
        ArrayViewMut2::from_shape((self.rows, self.cols), &mut data[self.range()]).expect("slot shape")
    }

    pub fn vec<'a>(&self, data: &'a [f64]) -> ArrayView1<'a, f64> {
        ArrayView1::from(&data[self.range()])
    }

    pub fn vec_mut<'a>(&self, data: &'a mut [f64]) -> ArrayViewMut1<'a, f64> {
        ArrayViewMut1::from(&mut data[self.range()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Store {
    Weights,
    Buffers,
}

/// Bias-free linear layer followed by batch normalization.
#[derive(Debug, Clone, Copy)]
pub struct BnLayer {
    pub weight: Slot,
    pub gamma: Slot,
    pub beta: Slot,
    pub running_mean: Slot,
    pub running_var: Slot,
}

#[derive(Debug, Clone, Copy)]
pub struct Dense {
    pub weight: Slot,
    pub bias: Slot,
}

/// Gate order in the stacked matrices is reset, update, candidate.
#[derive(Debug, Clone, Copy)]
pub struct GruSlots {
    pub w_ih: Slot,
    pub w_hh: Slot,
    pub b_ih: Slot,
    pub b_hh: Slot,
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub encoder: [BnLayer; 3],
    pub gru: GruSlots,
    pub decoder: [BnLayer; 3],
    pub static_head: [Dense; 3],
    pub moving_head: [Dense; 3],
    pub input_mean: Slot,
    pub input_std: Slot,
    pub n_weights: usize,
    pub n_buffers: usize,
    /// Every tensor by name, in storage order.
    pub entries: Vec<(String, Store, Slot)>,
}

struct Builder {
    n_weights: usize,
    n_buffers: usize,
    entries: Vec<(String, Store, Slot)>,
}

impl Builder {
    fn add(&mut self, name: String, store: Store, rows: usize, cols: usize) -> Slot {
        let counter = match store {
            Store::Weights => &mut self.n_weights,
            Store::Buffers => &mut self.n_buffers,
        };
        let slot = Slot {
            offset: *counter,
            rows,
            cols,
        };
        *counter += rows * cols;
        self.entries.push((name, store, slot));
        slot
    }

    fn bn_layer(&mut self, name: &str, fan_in: usize, width: usize) -> BnLayer {
        BnLayer {
            weight: self.add(format!("{name}.weight"), Store::Weights, fan_in, width),
            gamma: self.add(format!("{name}.bn.gamma"), Store::Weights, 1, width),
            beta: self.add(format!("{name}.bn.beta"), Store::Weights, 1, width),
            running_mean: self.add(format!("{name}.bn.running_mean"), Store::Buffers, 1, width),
            running_var: self.add(format!("{name}.bn.running_var"), Store::Buffers, 1, width),
        }
    }

    fn dense(&mut self, name: &str, fan_in: usize, width: usize) -> Dense {
        Dense {
            weight: self.add(format!("{name}.weight"), Store::Weights, fan_in, width),
            bias: self.add(format!("{name}.bias"), Store::Weights, 1, width),
        }
    }
}

impl Layout {
    pub fn new(cfg: &ModelConfig) -> Self {
        let mut b = Builder {
            n_weights: 0,
            n_buffers: 0,
            entries: Vec::new(),
        };
        let m = cfg.input_features;
        let input_mean = b.add("input.mean".into(), Store::Buffers, 1, m);
        let input_std = b.add("input.std".into(), Store::Buffers, 1, m);
        let e = cfg.encoder;
        let encoder = [
            b.bn_layer("encoder.0", m, e[0]),
            b.bn_layer("encoder.1", e[0], e[1]),
            b.bn_layer("encoder.2", e[1], e[2]),
        ];
        let h = cfg.gru_hidden;
        let gru = GruSlots {
            w_ih: b.add("gru.w_ih".into(), Store::Weights, e[2], 3 * h),
            w_hh: b.add("gru.w_hh".into(), Store::Weights, h, 3 * h),
            b_ih: b.add("gru.b_ih".into(), Store::Weights, 1, 3 * h),
            b_hh: b.add("gru.b_hh".into(), Store::Weights, 1, 3 * h),
        };
        let d = cfg.decoder;
        let decoder = [
            b.bn_layer("decoder.0", cfg.decoder_input(), d[0]),
            b.bn_layer("decoder.1", d[0], d[1]),
            b.bn_layer("decoder.2", d[1], d[2]),
        ];
        let hw = cfg.head;
        let mut head = |name: &str| {
            [
                b.dense(&format!("{name}.0"), d[2], hw[0]),
                b.dense(&format!("{name}.1"), hw[0], hw[1]),
                b.dense(&format!("{name}.2"), hw[1], hw[2]),
            ]
        };
        let static_head = head("static_head");
        let moving_head = head("moving_head");
        Layout {
            encoder,
            gru,
            decoder,
            static_head,
            moving_head,
            input_mean,
            input_std,
            n_weights: b.n_weights,
            n_buffers: b.n_buffers,
            entries: b.entries,
        }
    }
}

/// All learnable weights plus normalization state of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub weights: Vec<f64>,
    pub buffers: Vec<f64>,
}

impl ModelParams {
    /// He-normal weights for ReLU layers, uniform ±1/√H for the GRU, unit
    /// batch-norm scales, identity input normalization.
    pub fn init(config: &ModelConfig, seed: u64) -> Self {
        let layout = Layout::new(config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = vec![0.0; layout.n_weights];
        let mut buffers = vec![0.0; layout.n_buffers];

        let he = |slot: Slot, w: &mut [f64], rng: &mut ChaCha8Rng| {
            let std = (2.0 / slot.rows as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("std > 0");
            for v in &mut w[slot.range()] {
                *v = normal.sample(rng);
            }
        };
        for layer in layout.encoder.iter().chain(&layout.decoder) {
            he(layer.weight, &mut weights, &mut rng);
            weights[layer.gamma.range()].fill(1.0);
            buffers[layer.running_var.range()].fill(1.0);
        }
        for dense in layout.static_head.iter().chain(&layout.moving_head) {
            he(dense.weight, &mut weights, &mut rng);
        }
        let bound = 1.0 / (config.gru_hidden as f64).sqrt();
        let uniform = Uniform::new_inclusive(-bound, bound);
        let g = layout.gru;
        for slot in [g.w_ih, g.w_hh, g.b_ih, g.b_hh] {
            for v in &mut weights[slot.range()] {
                *v = uniform.sample(&mut rng);
            }
        }
        buffers[layout.input_std.range()].fill(1.0);
        Self {
            config: config.clone(),
            weights,
            buffers,
        }
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.config)
    }

    /// Number of learnable scalars.
    pub fn parameter_count(&self) -> usize {
        self.weights.len()
    }

    /// Sets the per-feature input normalization.
    pub fn set_input_normalization(&mut self, mean: &[f64], std: &[f64]) {
        let layout = self.layout();
        assert_eq!(mean.len(), layout.input_mean.len());
        assert_eq!(std.len(), layout.input_std.len());
        self.buffers[layout.input_mean.range()].copy_from_slice(mean);
        self.buffers[layout.input_std.range()].copy_from_slice(std);
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.buffers).all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parameter_budget() {
        let p = ModelParams::init(&ModelConfig::default(), 0);
        let n = p.parameter_count();
        assert!((100_000..=200_000).contains(&n), "{n}");
    }

    #[test]
    fn layout_is_contiguous_and_named_uniquely() {
        let layout = Layout::new(&ModelConfig::tiny());
        let mut names: Vec<&str> = layout.entries.iter().map(|e| e.0.as_str()).collect();
        let total = names.len();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), total);
        for store in [Store::Weights, Store::Buffers] {
            let mut next = 0;
            for (_, s, slot) in &layout.entries {
                if *s == store {
                    assert_eq!(slot.offset, next);
                    next += slot.len();
                }
            }
            let expected = if store == Store::Weights { layout.n_weights } else { layout.n_buffers };
            assert_eq!(next, expected);
        }
    }

    #[test]
    fn init_is_seeded() {
        let cfg = ModelConfig::tiny();
        assert_eq!(ModelParams::init(&cfg, 5), ModelParams::init(&cfg, 5));
        assert_ne!(ModelParams::init(&cfg, 5), ModelParams::init(&cfg, 6));
    }
}
