//! Multi-width convolutional sentence classifier with hand-written backward pass.
//!
//! conv(w) → ReLU → max over positions, for each width w; concatenate;
//! dense → ReLU → dropout; dense → softmax.

use serde::{Deserialize, Serialize};

use crate::representations::SentenceMatrix;
use crate::rng::SplitMix64;
use crate::tensor::{axpy, dot, Scalar, Tensor};

use super::params::{glorot_bound, uniform_tensor, ParamStore};
use super::NetError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnnConfig {
    pub filter_widths: Vec<usize>,
    pub filters_per_width: usize,
    /// Zero drops the hidden layer: pooled features feed the output layer directly.
    pub hidden_dim: usize,
    pub dropout_rate: f64,
    pub num_classes: usize,
    pub input_dim: usize,
    pub sentence_len: usize,
}

impl CnnConfig {
    pub fn new(input_dim: usize, num_classes: usize, sentence_len: usize) -> Self {
        Self {
            filter_widths: vec![3, 4, 5],
            filters_per_width: 150,
            hidden_dim: 100,
            dropout_rate: 0.5,
            num_classes,
            input_dim,
            sentence_len,
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |m: String| Err(NetError::InvalidConfig(m));
        if self.filter_widths.is_empty() {
            return bad("at least one filter width required".into());
        }
        if let Some(w) = self.filter_widths.iter().find(|&&w| w == 0 || w > self.sentence_len) {
            return bad(format!("filter width {w} outside [1, {}]", self.sentence_len));
        }
        if self.num_classes < 2 {
            return bad(format!("num_classes must be >= 2, got {}", self.num_classes));
        }
        if self.filters_per_width == 0 || self.input_dim == 0 {
            return bad("filters_per_width and input_dim must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout_rate must lie in [0, 1), got {}", self.dropout_rate));
        }
        Ok(())
    }

    pub fn pooled_dim(&self) -> usize {
        self.filter_widths.len() * self.filters_per_width
    }

    fn output_fan_in(&self) -> usize {
        if self.hidden_dim == 0 {
            self.pooled_dim()
        } else {
            self.hidden_dim
        }
    }
}

/// Tensor ids of the classifier layers inside a [`ParamStore`].
#[derive(Clone, Debug)]
pub struct CnnLayout {
    pub conv_weight: Vec<usize>,
    pub conv_bias: Vec<usize>,
    pub hidden: Option<(usize, usize)>,
    pub output: (usize, usize),
}

impl CnnLayout {
    pub fn resolve<T: Scalar>(cfg: &CnnConfig, params: &ParamStore<T>) -> Self {
        let n = cfg.filter_widths.len();
        Self {
            conv_weight: (0..n).map(|i| params.expect_id(&format!("conv{i}.weight"))).collect(),
            conv_bias: (0..n).map(|i| params.expect_id(&format!("conv{i}.bias"))).collect(),
            hidden: (cfg.hidden_dim > 0)
                .then(|| (params.expect_id("hidden.weight"), params.expect_id("hidden.bias"))),
            output: (params.expect_id("output.weight"), params.expect_id("output.bias")),
        }
    }
}

/// Register the classifier tensors: Glorot-uniform weights, zero biases.
pub fn register_cnn_params<T: Scalar>(cfg: &CnnConfig, store: &mut ParamStore<T>, rng: &mut SplitMix64) {
    let f = cfg.filters_per_width;
    for (i, &w) in cfg.filter_widths.iter().enumerate() {
        let fan_in = w * cfg.input_dim;
        store.insert(&format!("conv{i}.weight"), uniform_tensor(&[f, fan_in], glorot_bound(fan_in, f), rng));
        store.insert(&format!("conv{i}.bias"), Tensor::zeros(&[f]));
    }
    if cfg.hidden_dim > 0 {
        let fan_in = cfg.pooled_dim();
        store.insert(
            "hidden.weight",
            uniform_tensor(&[cfg.hidden_dim, fan_in], glorot_bound(fan_in, cfg.hidden_dim), rng),
        );
        store.insert("hidden.bias", Tensor::zeros(&[cfg.hidden_dim]));
    }
    let fan_in = cfg.output_fan_in();
    store.insert(
        "output.weight",
        uniform_tensor(&[cfg.num_classes, fan_in], glorot_bound(fan_in, cfg.num_classes), rng),
    );
    store.insert("output.bias", Tensor::zeros(&[cfg.num_classes]));
}

pub enum Mode<'a> {
    Eval,
    /// Dropout active, masks drawn from the given stream.
    Train(&'a mut SplitMix64),
}

/// Intermediate values of one forward pass, kept for backward.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    /// Max pre-activation per filter, before ReLU.
    pub pooled_pre: Vec<T>,
    /// First position attaining the max, per filter.
    pub pooled_arg: Vec<usize>,
    pub pooled: Vec<T>,
    pub hidden_pre: Vec<T>,
    /// Inverted-dropout multipliers applied to the dropped layer (all ones in eval).
    pub mask: Vec<T>,
    /// Dropped layer output fed to the output layer.
    pub features: Vec<T>,
    pub logits: Vec<T>,
    pub probs: Vec<T>,
}

fn relu<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// Softmax with max subtraction.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s = exps.iter().copied().fold(T::zero(), |a, b| a + b);
    exps.into_iter().map(|e| e / s).collect()
}

/// `log Σ exp(logits)`.
pub fn logsumexp<T: Scalar>(logits: &[T]) -> T {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let s = logits.iter().map(|&z| (z - m).exp()).fold(T::zero(), |a, b| a + b);
    m + s.ln()
}

fn dense<T: Scalar>(w: &Tensor<T>, b: &Tensor<T>, x: &[T]) -> Vec<T> {
    (0..w.shape()[0]).map(|o| dot(w.row(o), x) + b.data()[o]).collect()
}

/// Number of convolution positions evaluated for width `w`.
///
/// Windows lying entirely in the padding region all see identical rows, so
/// only the first of them is computed; it is also the first maximal one.
fn evaluated_positions(rows: usize, real_rows: usize, w: usize) -> usize {
    let valid = rows - w + 1;
    if real_rows < valid {
        real_rows + 1
    } else {
        valid
    }
}

pub fn forward_cached<T: Scalar>(
    m: &SentenceMatrix<T>,
    params: &ParamStore<T>,
    layout: &CnnLayout,
    cfg: &CnnConfig,
    mode: Mode<'_>,
) -> Result<ForwardCache<T>, NetError> {
    if m.cols != cfg.input_dim || m.rows != cfg.sentence_len || m.data.len() != m.rows * m.cols {
        return Err(NetError::ShapeMismatch {
            expected: (cfg.sentence_len, cfg.input_dim),
            found: (m.rows, m.cols),
        });
    }
    let d = cfg.input_dim;
    let f = cfg.filters_per_width;
    let mut pooled_pre = Vec::with_capacity(cfg.pooled_dim());
    let mut pooled_arg = Vec::with_capacity(cfg.pooled_dim());

    for (wi, &w) in cfg.filter_widths.iter().enumerate() {
        let weight = params.value(layout.conv_weight[wi]);
        let bias = params.value(layout.conv_bias[wi]);
        let mut best = vec![T::neg_infinity(); f];
        let mut arg = vec![0usize; f];
        for p in 0..evaluated_positions(m.rows, m.real_rows, w) {
            let window = &m.data[p * d..(p + w) * d];
            for k in 0..f {
                let z = dot(weight.row(k), window) + bias.data()[k];
                if z > best[k] {
                    best[k] = z;
                    arg[k] = p;
                }
            }
        }
        pooled_pre.extend(best);
        pooled_arg.extend(arg);
    }
    let pooled: Vec<T> = pooled_pre.iter().map(|&z| relu(z)).collect();

    let (hidden_pre, pre_dropout) = match layout.hidden {
        Some((hw, hb)) => {
            let pre = dense(params.value(hw), params.value(hb), &pooled);
            let act = pre.iter().map(|&z| relu(z)).collect();
            (pre, act)
        }
        None => (Vec::new(), pooled.clone()),
    };

    let mask: Vec<T> = match mode {
        Mode::Train(rng) if cfg.dropout_rate > 0.0 => {
            let keep = 1.0 - cfg.dropout_rate;
            let scale = T::from_f64(1.0 / keep);
            (0..pre_dropout.len())
                .map(|_| if rng.next_f64() < keep { scale } else { T::zero() })
                .collect()
        }
        _ => vec![T::one(); pre_dropout.len()],
    };
    let features: Vec<T> = pre_dropout.iter().zip(&mask).map(|(&a, &s)| a * s).collect();
    let logits = dense(params.value(layout.output.0), params.value(layout.output.1), &features);
    let probs = softmax(&logits);
    Ok(ForwardCache { pooled_pre, pooled_arg, pooled, hidden_pre, mask, features, logits, probs })
}

/// Class probabilities for one sentence matrix.
pub fn forward<T: Scalar>(
    m: &SentenceMatrix<T>,
    params: &ParamStore<T>,
    cfg: &CnnConfig,
    mode: Mode<'_>,
) -> Result<Vec<T>, NetError> {
    let layout = CnnLayout::resolve(cfg, params);
    Ok(forward_cached(m, params, &layout, cfg, mode)?.probs)
}

/// Accumulate parameter gradients of `-log p[gold]` and return the gradient
/// with respect to the input matrix.
pub fn backward<T: Scalar>(
    m: &SentenceMatrix<T>,
    cache: &ForwardCache<T>,
    gold: usize,
    params: &mut ParamStore<T>,
    layout: &CnnLayout,
    cfg: &CnnConfig,
) -> SentenceMatrix<T> {
    let (values, grads) = params.values_and_grads();
    let mut d_logits = cache.probs.clone();
    d_logits[gold] -= T::one();

    let (ow, ob) = layout.output;
    let mut d_features = vec![T::zero(); cache.features.len()];
    for (k, &g) in d_logits.iter().enumerate() {
        grads[ob].data_mut()[k] += g;
        axpy(g, &cache.features, grads[ow].row_mut(k));
        axpy(g, values[ow].row(k), &mut d_features);
    }
    let d_pre_dropout: Vec<T> = d_features.iter().zip(&cache.mask).map(|(&g, &s)| g * s).collect();

    let d_pooled = match layout.hidden {
        Some((hw, hb)) => {
            let mut d_pooled = vec![T::zero(); cache.pooled.len()];
            for (j, (&g, &z)) in d_pre_dropout.iter().zip(&cache.hidden_pre).enumerate() {
                if z <= T::zero() || g == T::zero() {
                    continue;
                }
                grads[hb].data_mut()[j] += g;
                axpy(g, &cache.pooled, grads[hw].row_mut(j));
                axpy(g, values[hw].row(j), &mut d_pooled);
            }
            d_pooled
        }
        None => d_pre_dropout,
    };

    let d = cfg.input_dim;
    let f = cfg.filters_per_width;
    let mut d_input = SentenceMatrix {
        rows: m.rows,
        cols: m.cols,
        data: vec![T::zero(); m.data.len()],
        channel_offsets: m.channel_offsets.clone(),
        real_rows: m.real_rows,
    };
    for (wi, &w) in cfg.filter_widths.iter().enumerate() {
        let (cw, cb) = (layout.conv_weight[wi], layout.conv_bias[wi]);
        for k in 0..f {
            let idx = wi * f + k;
            let g = d_pooled[idx];
            if cache.pooled_pre[idx] <= T::zero() || g == T::zero() {
                continue;
            }
            let p = cache.pooled_arg[idx];
            let span = p * d..(p + w) * d;
            grads[cb].data_mut()[k] += g;
            axpy(g, &m.data[span.clone()], grads[cw].row_mut(k));
            axpy(g, values[cw].row(k), &mut d_input.data[span]);
        }
    }
    d_input
}
