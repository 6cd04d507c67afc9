//! Central finite-difference verification of the hand-written gradients.

use std::sync::Arc;

use serde::Serialize;

use crate::corpus::{EntitySpan, LabeledSentence};
use crate::representations::{AuxData, Channel, CharChannel, CharConfig, CharVocab, PositionChannel, RepresentationStack, StaticTable};
use crate::rng::SplitMix64;
use crate::tensor::Tensor;

use super::cnn::CnnConfig;
use super::network::Network;
use super::params::ParamStore;
use super::NetError;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const MIN_COORDS_PER_TENSOR: usize = 20;

/// `|a − n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorCheck {
    pub name: String,
    pub coords: usize,
    pub max_rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradcheckReport {
    pub max_rel_error: f64,
    pub tensors: Vec<TensorCheck>,
}

/// Indices to probe: every coordinate of small tensors, a seeded sample otherwise.
fn sample_coords(numel: usize, want: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..numel).collect();
    if numel > want {
        rng.shuffle(&mut idx);
        idx.truncate(want);
        idx.sort_unstable();
    }
    idx
}

/// Compare `grad` against central differences of `loss` around `params`.
pub fn check_with<F>(
    params: &mut ParamStore<f64>,
    analytic: &[Tensor<f64>],
    h: f64,
    coords_per_tensor: usize,
    seed: u64,
    mut loss: F,
) -> Result<GradcheckReport, NetError>
where
    F: FnMut(&ParamStore<f64>) -> Result<f64, NetError>,
{
    let mut rng = SplitMix64::new(seed);
    let mut tensors = Vec::new();
    for id in 0..params.len() {
        let coords = sample_coords(params.value(id).numel(), coords_per_tensor.max(MIN_COORDS_PER_TENSOR), &mut rng);
        let mut worst = 0.0f64;
        for &c in &coords {
            let orig = params.value(id).data()[c];
            params.value_mut(id).data_mut()[c] = orig + h;
            let up = loss(params)?;
            params.value_mut(id).data_mut()[c] = orig - h;
            let down = loss(params)?;
            params.value_mut(id).data_mut()[c] = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max(relative_error(analytic[id].data()[c], numeric));
        }
        tensors.push(TensorCheck { name: params.name(id).to_string(), coords: coords.len(), max_rel_error: worst });
    }
    let max_rel_error = tensors.iter().map(|t| t.max_rel_error).fold(0.0, f64::max);
    Ok(GradcheckReport { max_rel_error, tensors })
}

/// Check every trainable tensor of `net` on `batch`, in 64-bit precision.
///
/// With `dropout_seed` set, every loss evaluation replays the same dropout masks.
pub fn gradcheck(
    net: &Network,
    batch: &[(&LabeledSentence, usize)],
    params: &ParamStore<f64>,
    h: f64,
    coords_per_tensor: usize,
    seed: u64,
    dropout_seed: Option<u64>,
) -> Result<GradcheckReport, NetError> {
    let mut params = params.clone();
    let mask_rng = || dropout_seed.map(SplitMix64::new);
    let mut rng = mask_rng();
    net.loss_and_grad(batch, &mut params, rng.as_mut())?;
    let analytic: Vec<Tensor<f64>> = (0..params.len()).map(|i| params.grad(i).clone()).collect();
    check_with(&mut params, &analytic, h, coords_per_tensor, seed, |p| {
        let mut rng = mask_rng();
        net.loss(batch, p, rng.as_mut())
    })
}

/// Synthetic full-CNN sample: 12-token sentences, 64 input columns
/// (static 38 + position 2×5 + characters 16), 5 classes, length 16.
pub fn synthetic_sample(seed: u64) -> (Network, Vec<(LabeledSentence, usize)>) {
    let mut rng = SplitMix64::new(seed);
    let vocab: Vec<String> = (0..40)
        .map(|i| {
            let len = 1 + rng.below(8);
            (0..len).map(|j| (b'a' + ((i * 7 + j * 3 + rng.below(26)) % 26) as u8) as char).collect()
        })
        .collect();
    let table = StaticTable::random(vocab.iter().take(30).map(String::as_str), 38, seed ^ 0x5eed);
    let chars = CharVocab::from_words(vocab.iter().map(String::as_str));
    let stack = RepresentationStack::new(vec![
        Channel::Static(Arc::new(table)),
        Channel::Position(PositionChannel { max_dist: 30, dim_per_nominal: 5 }),
        Channel::Char(CharChannel::new(CharConfig::default(), Arc::new(chars))),
    ]);
    let mut cnn = CnnConfig::new(stack.total_dim(), 5, 16);
    cnn.dropout_rate = 0.5;
    let net = Network::new(cnn, stack, AuxData::default()).expect("valid synthetic config");

    let batch = (0..2)
        .map(|k| {
            let words: Vec<&str> = (0..12).map(|_| vocab[rng.below(vocab.len())].as_str()).collect();
            let a = rng.below(5);
            let b = 6 + rng.below(6);
            let s = LabeledSentence::from_words(k, &words, EntitySpan::from_bounds(a, a), EntitySpan::from_bounds(b, b), "x");
            (s, rng.below(5))
        })
        .collect();
    (net, batch)
}

/// Gradcheck of the full CNN on [`synthetic_sample`].
pub fn gradcheck_full_cnn(seed: u64, h: f64) -> Result<GradcheckReport, NetError> {
    let (net, batch) = synthetic_sample(seed);
    let params: ParamStore<f64> = net.init_params(seed);
    let refs: Vec<(&LabeledSentence, usize)> = batch.iter().map(|(s, c)| (s, *c)).collect();
    gradcheck(&net, &refs, &params, h, 30, seed, Some(seed.wrapping_add(1)))
}

/// Gradcheck of `loss = c · (W x + b)`, a purely linear map.
pub fn gradcheck_linear_toy(seed: u64, h: f64) -> Result<GradcheckReport, NetError> {
    let (rows, cols) = (4, 6);
    let mut rng = SplitMix64::new(seed);
    let away_from_zero = |rng: &mut SplitMix64| {
        let m = rng.uniform(0.5, 1.0);
        if rng.next_f64() < 0.5 {
            -m
        } else {
            m
        }
    };
    let x: Vec<f64> = (0..cols).map(|_| away_from_zero(&mut rng)).collect();
    let c: Vec<f64> = (0..rows).map(|_| away_from_zero(&mut rng)).collect();
    let mut params = ParamStore::new();
    let w_data = (0..rows * cols).map(|_| rng.uniform(-0.1, 0.1)).collect();
    let w = params.insert("toy.weight", Tensor::from_vec(&[rows, cols], w_data));
    let b = params.insert("toy.bias", Tensor::zeros(&[rows]));

    let loss = |p: &ParamStore<f64>| -> Result<f64, NetError> {
        let (w, b) = (p.value(w), p.value(b));
        Ok((0..rows)
            .map(|r| c[r] * (w.row(r).iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + b.data()[r]))
            .sum())
    };
    let mut gw = Tensor::zeros(&[rows, cols]);
    for r in 0..rows {
        for j in 0..cols {
            gw.data_mut()[r * cols + j] = c[r] * x[j];
        }
    }
    let gb = Tensor::from_vec(&[rows], c.clone());
    check_with(&mut params, &[gw, gb], h, rows * cols, seed, loss)
}
