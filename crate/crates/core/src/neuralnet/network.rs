use crate::corpus::LabeledSentence;
use crate::representations::{AuxData, RepresentationStack, SentenceMatrix};
use crate::rng::{streams, SplitMix64};
use crate::tensor::Scalar;

use super::cnn::{backward, forward_cached, logsumexp, register_cnn_params, CnnConfig, CnnLayout, Mode};
use super::params::ParamStore;
use super::NetError;

/// A representation stack feeding a CNN classifier.
#[derive(Clone, Debug)]
pub struct Network {
    pub cnn: CnnConfig,
    pub stack: RepresentationStack,
    pub aux: AuxData,
}

impl Network {
    pub fn new(cnn: CnnConfig, stack: RepresentationStack, aux: AuxData) -> Result<Self, NetError> {
        cnn.validate()?;
        if cnn.input_dim != stack.total_dim() {
            return Err(NetError::InvalidConfig(format!(
                "input_dim {} does not match stack width {}",
                cnn.input_dim,
                stack.total_dim()
            )));
        }
        Ok(Self { cnn, stack, aux })
    }

    /// All trainable tensors, drawn from the init stream of `seed`.
    pub fn init_params<T: Scalar>(&self, seed: u64) -> ParamStore<T> {
        let mut rng = SplitMix64::stream(seed, streams::INIT);
        let mut store = ParamStore::new();
        register_cnn_params(&self.cnn, &mut store, &mut rng);
        self.stack.register_params(&mut store, &mut rng);
        store
    }

    pub fn compose<T: Scalar>(&self, s: &LabeledSentence, params: &ParamStore<T>) -> Result<SentenceMatrix<T>, NetError> {
        Ok(self.stack.compose(s, &self.aux, self.cnn.sentence_len, params)?)
    }

    pub fn probabilities<T: Scalar>(&self, s: &LabeledSentence, params: &ParamStore<T>) -> Result<Vec<T>, NetError> {
        let m = self.compose(s, params)?;
        let layout = CnnLayout::resolve(&self.cnn, params);
        Ok(forward_cached(&m, params, &layout, &self.cnn, Mode::Eval)?.probs)
    }

    /// Eval-mode argmax; ties go to the lowest class index.
    pub fn predict<T: Scalar>(&self, s: &LabeledSentence, params: &ParamStore<T>) -> Result<usize, NetError> {
        Ok(argmax(&self.probabilities(s, params)?))
    }

    /// Mean cross-entropy over `batch`; overwrites the gradient buffers.
    ///
    /// With `dropout = None` the network runs in eval mode.
    pub fn loss_and_grad<T: Scalar>(
        &self,
        batch: &[(&LabeledSentence, usize)],
        params: &mut ParamStore<T>,
        mut dropout: Option<&mut SplitMix64>,
    ) -> Result<T, NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        params.zero_grads();
        let layout = CnnLayout::resolve(&self.cnn, params);
        let mut total = T::zero();
        for &(sentence, gold) in batch {
            if gold >= self.cnn.num_classes {
                return Err(NetError::ClassOutOfRange { class: gold, classes: self.cnn.num_classes });
            }
            let m = self.compose(sentence, params)?;
            let mode = match dropout.as_deref_mut() {
                Some(rng) => Mode::Train(rng),
                None => Mode::Eval,
            };
            let cache = forward_cached(&m, params, &layout, &self.cnn, mode)?;
            total += logsumexp(&cache.logits) - cache.logits[gold];
            let d_input = backward(&m, &cache, gold, params, &layout, &self.cnn);
            self.stack.backward(sentence, &d_input, params);
        }
        let inv = T::one() / T::from_f64(batch.len() as f64);
        params.scale_grads(inv);
        Ok(total * inv)
    }

    /// Mean cross-entropy without touching gradients.
    pub fn loss<T: Scalar>(
        &self,
        batch: &[(&LabeledSentence, usize)],
        params: &ParamStore<T>,
        mut dropout: Option<&mut SplitMix64>,
    ) -> Result<T, NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let layout = CnnLayout::resolve(&self.cnn, params);
        let mut total = T::zero();
        for &(sentence, gold) in batch {
            let m = self.compose(sentence, params)?;
            let mode = match dropout.as_deref_mut() {
                Some(rng) => Mode::Train(rng),
                None => Mode::Eval,
            };
            let cache = forward_cached(&m, params, &layout, &self.cnn, mode)?;
            total += logsumexp(&cache.logits) - cache.logits[gold];
        }
        Ok(total / T::from_f64(batch.len() as f64))
    }
}

/// Index of the first maximal entry.
pub fn argmax<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}
