//! Batched forward and backward pass of the segmentation network.
//!
//! Every real point of every frame of every window in a batch is stacked
//! into one matrix, so padded points never enter the computation. Batch
//! normalization in training mode normalizes over all stacked rows of the
//! layer (encoder: all frames of the batch, decoder: all last frames).

use std::ops::Range;

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::{BnLayer, Dense, Layout, ModelParams};
use crate::ego::{apply_update_heads, SolverConfig};
use crate::error::{Error, Result};
use crate::point::{EgoMotionState, FrameWindow, GroundTruthLabels, PointClass, RadarExtrinsics};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;
/// Probability clamp of the cross-entropy.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics and dropout drawn from `seed`.
    Train { seed: u64 },
    /// Running statistics, no dropout.
    Infer,
}

impl Mode {
    fn is_train(self) -> bool {
        matches!(self, Mode::Train { .. })
    }
}

/// One training example: a window, supervised on its last frame.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub window: FrameWindow<'a>,
    pub sample_weight: f64,
}

/// Initial static and moving weights for the points of the last frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeadOutputs {
    pub static_ini: Vec<f64>,
    pub moving_ini: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn bce(p: f64, target: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
}

/// Derivative of the clamped cross-entropy with respect to the logit.
fn bce_logit_grad(p: f64, target: f64) -> f64 {
    if (PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
        p - target
    } else {
        0.0
    }
}

fn targets(gt: &GroundTruthLabels) -> (Vec<f64>, Vec<f64>) {
    let ind = |c: PointClass| gt.class.iter().map(|&k| f64::from(u8::from(k == c))).collect();
    (ind(PointClass::Static), ind(PointClass::Moving))
}

/// Sample-weighted sum of the static and moving cross-entropies, averaged over
/// the points of the frame. An empty frame has zero loss.
pub fn loss(static_ini: &[f64], moving_ini: &[f64], gt: &GroundTruthLabels, sample_weight: f64) -> Result<f64> {
    for len in [moving_ini.len(), gt.len()] {
        if len != static_ini.len() {
            return Err(Error::LengthMismatch {
                left: static_ini.len(),
                right: len,
            });
        }
    }
    if static_ini.is_empty() {
        return Ok(0.0);
    }
    let (ts, tm) = targets(gt);
    let sum: f64 = (0..static_ini.len())
        .map(|i| bce(static_ini[i], ts[i]) + bce(moving_ini[i], tm[i]))
        .sum();
    Ok(sample_weight * sum / static_ini.len() as f64)
}

struct Packed {
    /// Normalized features of all points, `P x M`.
    x: Array2<f64>,
    /// Row range of frame `t` of window `b` at index `b * t_len + t`.
    frames: Vec<Range<usize>>,
    /// Decoder row range of each window's last frame.
    last: Vec<Range<usize>>,
    /// Stacked row of each decoder row.
    last_rows: Vec<usize>,
    batch: usize,
    t_len: usize,
}

fn pack(params: &ModelParams, layout: &Layout, windows: &[FrameWindow]) -> Result<Packed> {
    let cfg = &params.config;
    let t_len = windows.first().map_or(0, FrameWindow::len);
    if windows.iter().any(|w| w.len() != t_len) {
        return Err(Error::Shape("windows of one batch must have equal length".into()));
    }
    if t_len > cfg.window {
        return Err(Error::Shape(format!(
            "window of {t_len} frames exceeds the configured {}",
            cfg.window
        )));
    }
    if windows.iter().any(|w| !w.is_ordered()) {
        return Err(Error::Shape("window frames are not chronologically ordered".into()));
    }
    let m = cfg.input_features;
    let total: usize = windows.iter().flat_map(|w| w.frames()).map(|f| f.len()).sum();
    let mean = layout.input_mean.vec(&params.buffers);
    let std = layout.input_std.vec(&params.buffers);
    let mut x = Array2::zeros((total, m));
    let mut frames = Vec::with_capacity(windows.len() * t_len);
    let mut last = Vec::with_capacity(windows.len());
    let mut last_rows = Vec::new();
    let mut row = 0;
    for w in windows {
        for (t, f) in w.frames().iter().enumerate() {
            let start = row;
            for p in &f.points {
                let feat = p.features(m);
                for j in 0..m {
                    x[[row, j]] = (feat[j] - mean[j]) / std[j];
                }
                row += 1;
            }
            frames.push(start..row);
            if t + 1 == t_len {
                let q = last_rows.len();
                last_rows.extend(start..row);
                last.push(q..last_rows.len());
            }
        }
    }
    Ok(Packed {
        x,
        frames,
        last,
        last_rows,
        batch: windows.len(),
        t_len,
    })
}

struct BnCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    out: Array2<f64>,
}

/// Linear (no bias), batch norm, ReLU. In training mode the running
/// statistics in `buffers` are advanced.
fn bn_relu_forward(
    input: ArrayView2<f64>,
    layer: &BnLayer,
    params: &ModelParams,
    train: bool,
    buffers: &mut [f64],
) -> BnCache {
    let z = input.dot(&layer.weight.mat(&params.weights));
    let n = z.nrows();
    let (mean, var) = if train && n > 0 {
        let mean = z.mean_axis(Axis(0)).expect("rows > 0");
        let var = z.var_axis(Axis(0), 0.0);
        let unbiased = if n > 1 { &var * (n as f64 / (n - 1) as f64) } else { var.clone() };
        let mut rm = layer.running_mean.vec_mut(buffers);
        rm.zip_mut_with(&mean, |r, &b| *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * b);
        let mut rv = layer.running_var.vec_mut(buffers);
        rv.zip_mut_with(&unbiased, |r, &b| *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * b);
        (mean, var)
    } else {
        (
            layer.running_mean.vec(&params.buffers).to_owned(),
            layer.running_var.vec(&params.buffers).to_owned(),
        )
    };
    let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
    let xhat = (z - &mean) * &inv_std;
    let gamma = layer.gamma.vec(&params.weights);
    let beta = layer.beta.vec(&params.weights);
    let out = (&xhat * &gamma + &beta).mapv(|v| v.max(0.0));
    BnCache { xhat, inv_std, out }
}

/// Returns the gradient with respect to the layer input when `need_input`.
fn bn_relu_backward(
    d_out: Array2<f64>,
    input: ArrayView2<f64>,
    cache: &BnCache,
    layer: &BnLayer,
    params: &ModelParams,
    grads: &mut [f64],
    need_input: bool,
) -> Option<Array2<f64>> {
    let n = d_out.nrows();
    let mut dy = d_out;
    Zip::from(&mut dy).and(&cache.out).for_each(|d, &o| {
        if o <= 0.0 {
            *d = 0.0;
        }
    });
    let dgamma = (&dy * &cache.xhat).sum_axis(Axis(0));
    let dbeta = dy.sum_axis(Axis(0));
    layer.gamma.vec_mut(grads).scaled_add(1.0, &dgamma);
    layer.beta.vec_mut(grads).scaled_add(1.0, &dbeta);
    let gamma = layer.gamma.vec(&params.weights);
    let dxhat = dy * &gamma;
    let sum_dxhat = dxhat.sum_axis(Axis(0));
    let sum_dxhat_xhat = (&dxhat * &cache.xhat).sum_axis(Axis(0));
    let nf = n.max(1) as f64;
    let dz = (dxhat * nf - &sum_dxhat - &cache.xhat * &sum_dxhat_xhat) * &(&cache.inv_std / nf);
    layer.weight.mat_mut(grads).scaled_add(1.0, &input.t().dot(&dz));
    need_input.then(|| dz.dot(&layer.weight.mat(&params.weights).t()))
}

#[derive(Clone, Copy)]
enum Activation {
    Relu,
    Sigmoid,
}

fn dense_forward(input: ArrayView2<f64>, dense: &Dense, params: &ModelParams, act: Activation) -> Array2<f64> {
    let z = input.dot(&dense.weight.mat(&params.weights)) + &dense.bias.vec(&params.weights);
    match act {
        Activation::Relu => z.mapv(|v| v.max(0.0)),
        Activation::Sigmoid => z.mapv(sigmoid),
    }
}

/// `d_pre` is the gradient at the pre-activation.
fn dense_backward(
    d_pre: Array2<f64>,
    input: ArrayView2<f64>,
    dense: &Dense,
    params: &ModelParams,
    grads: &mut [f64],
) -> Array2<f64> {
    dense.weight.mat_mut(grads).scaled_add(1.0, &input.t().dot(&d_pre));
    dense.bias.vec_mut(grads).scaled_add(1.0, &d_pre.sum_axis(Axis(0)));
    d_pre.dot(&dense.weight.mat(&params.weights).t())
}

fn relu_mask(mut d: Array2<f64>, out: &Array2<f64>) -> Array2<f64> {
    Zip::from(&mut d).and(out).for_each(|d, &o| {
        if o <= 0.0 {
            *d = 0.0;
        }
    });
    d
}

struct HeadCache {
    /// Outputs of the three layers; the last holds probabilities.
    acts: [Array2<f64>; 3],
}

fn head_forward(input: ArrayView2<f64>, head: &[Dense; 3], params: &ModelParams) -> HeadCache {
    let a0 = dense_forward(input, &head[0], params, Activation::Relu);
    let a1 = dense_forward(a0.view(), &head[1], params, Activation::Relu);
    let a2 = dense_forward(a1.view(), &head[2], params, Activation::Sigmoid);
    HeadCache { acts: [a0, a1, a2] }
}

fn head_backward(
    d_logit: Array2<f64>,
    input: ArrayView2<f64>,
    cache: &HeadCache,
    head: &[Dense; 3],
    params: &ModelParams,
    grads: &mut [f64],
) -> Array2<f64> {
    let [a0, a1, _] = &cache.acts;
    let d1 = dense_backward(d_logit, a1.view(), &head[2], params, grads);
    let d0 = dense_backward(relu_mask(d1, a1), a0.view(), &head[1], params, grads);
    dense_backward(relu_mask(d0, a0), input, &head[0], params, grads)
}

struct GruStep {
    x: Array2<f64>,
    h_prev: Array2<f64>,
    r: Array2<f64>,
    z: Array2<f64>,
    n: Array2<f64>,
    /// Recurrent candidate pre-activation `h W_hn + b_hn`.
    ghn: Array2<f64>,
}

struct Cache {
    packed: Packed,
    encoder: Vec<BnCache>,
    pooled: Array2<f64>,
    gru: Vec<GruStep>,
    dec_in: Array2<f64>,
    decoder: Vec<BnCache>,
    /// Per-window channel mask applied after the second decoder layer.
    dropout: Option<Array2<f64>>,
    dropped: Array2<f64>,
    static_head: HeadCache,
    moving_head: HeadCache,
}

fn forward_cached(params: &ModelParams, windows: &[FrameWindow], mode: Mode) -> Result<(Cache, Vec<f64>)> {
    let layout = params.layout();
    let cfg = &params.config;
    let train = mode.is_train();
    let mut buffers = params.buffers.clone();
    let packed = pack(params, &layout, windows)?;

    let mut encoder: Vec<BnCache> = Vec::with_capacity(3);
    for (k, layer) in layout.encoder.iter().enumerate() {
        let input = if k == 0 { packed.x.view() } else { encoder[k - 1].out.view() };
        let c = bn_relu_forward(input, layer, params, train, &mut buffers);
        encoder.push(c);
    }

    let e = cfg.encoder[2];
    let enc_out = &encoder[2].out;
    let mut pooled = Array2::zeros((packed.frames.len(), e));
    for (f, range) in packed.frames.iter().enumerate() {
        if !range.is_empty() {
            let mean = enc_out.slice(s![range.clone(), ..]).mean_axis(Axis(0)).expect("non-empty");
            pooled.row_mut(f).assign(&mean);
        }
    }

    let h_dim = cfg.gru_hidden;
    let g = layout.gru;
    let w_ih = g.w_ih.mat(&params.weights);
    let w_hh = g.w_hh.mat(&params.weights);
    let b_ih = g.b_ih.vec(&params.weights);
    let b_hh = g.b_hh.vec(&params.weights);
    let mut h = Array2::<f64>::zeros((packed.batch, h_dim));
    let mut gru = Vec::with_capacity(packed.t_len);
    for t in 0..packed.t_len {
        let mut x = Array2::zeros((packed.batch, e));
        for b in 0..packed.batch {
            x.row_mut(b).assign(&pooled.row(b * packed.t_len + t));
        }
        let gi = x.dot(&w_ih) + &b_ih;
        let gh = h.dot(&w_hh) + &b_hh;
        let r = (&gi.slice(s![.., ..h_dim]) + &gh.slice(s![.., ..h_dim])).mapv(sigmoid);
        let z = (&gi.slice(s![.., h_dim..2 * h_dim]) + &gh.slice(s![.., h_dim..2 * h_dim])).mapv(sigmoid);
        let ghn = gh.slice(s![.., 2 * h_dim..]).to_owned();
        let n = (&gi.slice(s![.., 2 * h_dim..]) + &(&r * &ghn)).mapv(f64::tanh);
        let h_new = (1.0 - &z) * &n + &z * &h;
        gru.push(GruStep {
            x,
            h_prev: std::mem::replace(&mut h, h_new),
            r,
            z,
            n,
            ghn,
        });
    }

    let m = cfg.input_features;
    let [e0, e1, _] = cfg.encoder;
    let q = packed.last_rows.len();
    let mut dec_in = Array2::zeros((q, cfg.decoder_input()));
    for (b, range) in packed.last.iter().enumerate() {
        for qi in range.clone() {
            let p = packed.last_rows[qi];
            let mut row = dec_in.row_mut(qi);
            row.slice_mut(s![..m]).assign(&packed.x.row(p));
            row.slice_mut(s![m..m + e0]).assign(&encoder[0].out.row(p));
            row.slice_mut(s![m + e0..m + e0 + e1]).assign(&encoder[1].out.row(p));
            row.slice_mut(s![m + e0 + e1..]).assign(&h.row(b));
        }
    }

    let d0 = bn_relu_forward(dec_in.view(), &layout.decoder[0], params, train, &mut buffers);
    let d1 = bn_relu_forward(d0.out.view(), &layout.decoder[1], params, train, &mut buffers);
    let (dropout, dropped) = match mode {
        Mode::Train { seed } if cfg.dropout > 0.0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = 1.0 / (1.0 - cfg.dropout);
            let mask = Array2::from_shape_simple_fn((packed.batch, cfg.decoder[1]), || {
                if rng.gen::<f64>() < cfg.dropout {
                    0.0
                } else {
                    keep
                }
            });
            let mut dropped = d1.out.clone();
            for (b, range) in packed.last.iter().enumerate() {
                let mut rows = dropped.slice_mut(s![range.clone(), ..]);
                rows *= &mask.row(b);
            }
            (Some(mask), dropped)
        }
        _ => (None, d1.out.clone()),
    };
    let d2 = bn_relu_forward(dropped.view(), &layout.decoder[2], params, train, &mut buffers);
    let static_head = head_forward(d2.out.view(), &layout.static_head, params);
    let moving_head = head_forward(d2.out.view(), &layout.moving_head, params);

    let cache = Cache {
        packed,
        encoder,
        pooled,
        gru,
        dec_in,
        decoder: vec![d0, d1, d2],
        dropout,
        dropped,
        static_head,
        moving_head,
    };
    Ok((cache, buffers))
}

fn split_outputs(cache: &Cache) -> Vec<HeadOutputs> {
    let s = &cache.static_head.acts[2];
    let m = &cache.moving_head.acts[2];
    cache
        .packed
        .last
        .iter()
        .map(|r| HeadOutputs {
            static_ini: s.slice(s![r.clone(), 0]).to_vec(),
            moving_ini: m.slice(s![r.clone(), 0]).to_vec(),
        })
        .collect()
}

/// Head outputs for the last frame of each window.
pub fn forward(params: &ModelParams, windows: &[FrameWindow], mode: Mode) -> Result<Vec<HeadOutputs>> {
    if windows.is_empty() {
        return Ok(Vec::new());
    }
    let (cache, _) = forward_cached(params, windows, mode)?;
    Ok(split_outputs(&cache))
}

/// Result of one training pass over a batch.
#[derive(Debug, Clone)]
pub struct Gradients {
    /// Mean over windows of the per-window loss.
    pub loss: f64,
    /// Same layout as [`ModelParams::weights`].
    pub weights: Vec<f64>,
    /// Buffers with the running statistics advanced by this batch.
    pub buffers: Vec<f64>,
    pub outputs: Vec<HeadOutputs>,
    /// Ego-motion of each last frame, when requested.
    pub ego: Option<Vec<Option<EgoMotionState>>>,
}

/// Loss gradients of a batch in training mode. Passing `ego` also runs the
/// weight-update heads on the outputs; this never feeds back into the
/// gradients.
pub fn gradients(
    params: &ModelParams,
    batch: &[Sample],
    seed: u64,
    ego: Option<(&RadarExtrinsics, &SolverConfig)>,
) -> Result<Gradients> {
    if batch.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    let windows: Vec<FrameWindow> = batch.iter().map(|s| s.window).collect();
    let mut labels = Vec::with_capacity(batch.len());
    for (i, w) in windows.iter().enumerate() {
        let last = w.last();
        let gt = last.gt.as_ref().ok_or(Error::MissingGroundTruth { frame: i })?;
        if gt.len() != last.len() {
            return Err(Error::LengthMismatch {
                left: last.len(),
                right: gt.len(),
            });
        }
        labels.push(targets(gt));
    }

    let (cache, buffers) = forward_cached(params, &windows, Mode::Train { seed })?;
    let layout = params.layout();
    let cfg = &params.config;
    let outputs = split_outputs(&cache);

    let q = cache.packed.last_rows.len();
    let mut d_static = Array2::zeros((q, 1));
    let mut d_moving = Array2::zeros((q, 1));
    let mut total = 0.0;
    for (b, range) in cache.packed.last.iter().enumerate() {
        if range.is_empty() {
            continue;
        }
        let sw = batch[b].sample_weight;
        let (ts, tm) = &labels[b];
        let out = &outputs[b];
        let coef = sw / (range.len() as f64 * batch.len() as f64);
        for (i, qi) in range.clone().enumerate() {
            let (ps, pm) = (out.static_ini[i], out.moving_ini[i]);
            total += coef * (bce(ps, ts[i]) + bce(pm, tm[i]));
            d_static[[qi, 0]] = coef * bce_logit_grad(ps, ts[i]);
            d_moving[[qi, 0]] = coef * bce_logit_grad(pm, tm[i]);
        }
    }

    let mut grads = vec![0.0; layout.n_weights];
    let dec_out = cache.decoder[2].out.view();
    let mut d_dec = head_backward(d_static, dec_out, &cache.static_head, &layout.static_head, params, &mut grads);
    d_dec += &head_backward(d_moving, dec_out, &cache.moving_head, &layout.moving_head, params, &mut grads);

    let d_dropped = bn_relu_backward(
        d_dec,
        cache.dropped.view(),
        &cache.decoder[2],
        &layout.decoder[2],
        params,
        &mut grads,
        true,
    )
    .expect("input gradient");
    let mut d_d1 = d_dropped;
    if let Some(mask) = &cache.dropout {
        for (b, range) in cache.packed.last.iter().enumerate() {
            let mut rows = d_d1.slice_mut(s![range.clone(), ..]);
            rows *= &mask.row(b);
        }
    }
    let d_d0 = bn_relu_backward(
        d_d1,
        cache.decoder[0].out.view(),
        &cache.decoder[1],
        &layout.decoder[1],
        params,
        &mut grads,
        true,
    )
    .expect("input gradient");
    let d_in = bn_relu_backward(
        d_d0,
        cache.dec_in.view(),
        &cache.decoder[0],
        &layout.decoder[0],
        params,
        &mut grads,
        true,
    )
    .expect("input gradient");

    let m = cfg.input_features;
    let [e0, e1, e2] = cfg.encoder;
    let h_dim = cfg.gru_hidden;
    let packed = &cache.packed;
    let rows = packed.x.nrows();
    let mut d_a1 = Array2::zeros((rows, e0));
    let mut d_a2 = Array2::zeros((rows, e1));
    let mut d_h = Array2::zeros((packed.batch, h_dim));
    for (b, range) in packed.last.iter().enumerate() {
        for qi in range.clone() {
            let p = packed.last_rows[qi];
            let row = d_in.row(qi);
            d_a1.row_mut(p).assign(&row.slice(s![m..m + e0]));
            d_a2.row_mut(p).assign(&row.slice(s![m + e0..m + e0 + e1]));
            let mut dh = d_h.row_mut(b);
            dh += &row.slice(s![m + e0 + e1..]);
        }
    }

    let g = layout.gru;
    let w_ih = g.w_ih.mat(&params.weights);
    let w_hh = g.w_hh.mat(&params.weights);
    let mut d_pooled = Array2::zeros(cache.pooled.raw_dim());
    for (t, step) in cache.gru.iter().enumerate().rev() {
        let dn = &d_h * &(1.0 - &step.z);
        let dz = &d_h * &(&step.h_prev - &step.n);
        let mut dh_prev = &d_h * &step.z;
        let dn_pre = dn * &step.n.mapv(|v| 1.0 - v * v);
        let dr = &dn_pre * &step.ghn;
        let dr_pre = dr * &step.r.mapv(|v| v * (1.0 - v));
        let dz_pre = dz * &step.z.mapv(|v| v * (1.0 - v));
        let mut dgi = Array2::zeros((packed.batch, 3 * h_dim));
        dgi.slice_mut(s![.., ..h_dim]).assign(&dr_pre);
        dgi.slice_mut(s![.., h_dim..2 * h_dim]).assign(&dz_pre);
        let mut dgh = dgi.clone();
        dgi.slice_mut(s![.., 2 * h_dim..]).assign(&dn_pre);
        dgh.slice_mut(s![.., 2 * h_dim..]).assign(&(&dn_pre * &step.r));

        g.w_ih.mat_mut(&mut grads).scaled_add(1.0, &step.x.t().dot(&dgi));
        g.b_ih.vec_mut(&mut grads).scaled_add(1.0, &dgi.sum_axis(Axis(0)));
        g.w_hh.mat_mut(&mut grads).scaled_add(1.0, &step.h_prev.t().dot(&dgh));
        g.b_hh.vec_mut(&mut grads).scaled_add(1.0, &dgh.sum_axis(Axis(0)));
        let dx = dgi.dot(&w_ih.t());
        dh_prev += &dgh.dot(&w_hh.t());
        for b in 0..packed.batch {
            d_pooled.row_mut(b * packed.t_len + t).assign(&dx.row(b));
        }
        d_h = dh_prev;
    }

    let mut d_a3 = Array2::zeros((rows, e2));
    for (f, range) in packed.frames.iter().enumerate() {
        if range.is_empty() {
            continue;
        }
        let share = &d_pooled.row(f) / range.len() as f64;
        for p in range.clone() {
            d_a3.row_mut(p).assign(&share);
        }
    }
    let enc = &cache.encoder;
    d_a2 += &bn_relu_backward(
        d_a3,
        enc[1].out.view(),
        &enc[2],
        &layout.encoder[2],
        params,
        &mut grads,
        true,
    )
    .expect("input gradient");
    d_a1 += &bn_relu_backward(
        d_a2,
        enc[0].out.view(),
        &enc[1],
        &layout.encoder[1],
        params,
        &mut grads,
        true,
    )
    .expect("input gradient");
    bn_relu_backward(d_a1, packed.x.view(), &enc[0], &layout.encoder[0], params, &mut grads, false);

    let ego = ego.map(|(extr, solver)| {
        windows
            .iter()
            .zip(&outputs)
            .map(|(w, o)| {
                apply_update_heads(&w.last().points, &o.static_ini, &o.moving_ini, extr, solver)
                    .ok()
                    .and_then(|inf| inf.ego)
            })
            .collect()
    });

    Ok(Gradients {
        loss: total,
        weights: grads,
        buffers,
        outputs,
        ego,
    })
}

/// Batch loss in training mode, without gradients. Used for finite
/// differences.
pub fn batch_loss(params: &ModelParams, batch: &[Sample], seed: u64) -> Result<f64> {
    let windows: Vec<FrameWindow> = batch.iter().map(|s| s.window).collect();
    let outputs = forward(params, &windows, Mode::Train { seed })?;
    let mut total = 0.0;
    for (i, (s, o)) in batch.iter().zip(&outputs).enumerate() {
        let gt = s.window.last().gt.as_ref().ok_or(Error::MissingGroundTruth { frame: i })?;
        total += loss(&o.static_ini, &o.moving_ini, gt, s.sample_weight)?;
    }
    Ok(total / batch.len() as f64)
}
