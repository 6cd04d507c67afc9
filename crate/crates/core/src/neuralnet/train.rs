use serde::{Deserialize, Serialize};

use crate::corpus::{encode_labels, Dataset, LabelSet, LabeledSentence};
use crate::eval::{aggregate, confusion, MetricsReport};
use crate::representations::EpochsProfile;
use crate::rng::{streams, SplitMix64};

use super::adam::{adam_step, AdamConfig};
use super::network::Network;
use super::params::ParamStore;
use super::NetError;

pub const CONTEXTUAL_EPOCHS: usize = 70;
pub const PLAIN_EPOCHS: usize = 120;
pub const DEFAULT_BATCH_SIZE: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl TrainConfig {
    pub fn for_profile(profile: EpochsProfile, seed: u64) -> Self {
        let epochs = match profile {
            EpochsProfile::Contextual => CONTEXTUAL_EPOCHS,
            EpochsProfile::Plain => PLAIN_EPOCHS,
        };
        Self { batch_size: DEFAULT_BATCH_SIZE, epochs, seed, shuffle_each_epoch: true }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(NetError::InvalidConfig(format!(
                "batch_size and epochs must be >= 1 (got {} and {})",
                self.batch_size, self.epochs
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_f1: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ParamStore<f32>,
    pub history: Vec<EpochRecord>,
}

/// `epoch,train_loss,dev_f1` rows.
pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,dev_f1\n");
    for r in history {
        out.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, r.dev_f1));
    }
    out
}

/// Fail fast on any sentence the stack cannot compose or whose label is unknown.
pub fn check_dataset(net: &Network, labels: &LabelSet, ds: &Dataset) -> Result<Vec<usize>, NetError> {
    for s in &ds.sentences {
        net.stack.check(s, &net.aux)?;
    }
    Ok(encode_labels(ds, labels)?)
}

pub fn predict_all(net: &Network, params: &ParamStore<f32>, ds: &Dataset) -> Result<Vec<usize>, NetError> {
    ds.sentences.iter().map(|s| net.predict(s, params)).collect()
}

/// Metrics of `params` on `ds`.
pub fn evaluate(net: &Network, params: &ParamStore<f32>, ds: &Dataset, labels: &LabelSet) -> Result<MetricsReport, NetError> {
    let golds = encode_labels(ds, labels)?;
    let preds = predict_all(net, params, ds)?;
    Ok(aggregate(&confusion(&preds, &golds, labels.len())?, labels)?)
}

pub fn train(
    net: &Network,
    labels: &LabelSet,
    train_set: &Dataset,
    dev_set: &Dataset,
    adam: &AdamConfig,
    tc: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome, NetError> {
    tc.validate()?;
    adam.validate()?;
    if train_set.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    let golds = check_dataset(net, labels, train_set)?;
    check_dataset(net, labels, dev_set)?;

    let mut params: ParamStore<f32> = net.init_params(tc.seed);
    let mut dropout = SplitMix64::stream(tc.seed, streams::DROPOUT);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(tc.epochs);

    for epoch in 1..=tc.epochs {
        if tc.shuffle_each_epoch {
            SplitMix64::indexed_stream(tc.seed, streams::SHUFFLE, epoch as u64).shuffle(&mut order);
        }
        let mut loss_sum = 0.0;
        for chunk in order.chunks(tc.batch_size) {
            let batch: Vec<(&LabeledSentence, usize)> =
                chunk.iter().map(|&i| (&train_set.sentences[i], golds[i])).collect();
            let loss = net.loss_and_grad(&batch, &mut params, Some(&mut dropout))?;
            loss_sum += f64::from(loss) * batch.len() as f64;
            adam_step(&mut params, adam);
        }
        let dev_f1 = if dev_set.is_empty() {
            0.0
        } else {
            evaluate(net, &params, dev_set, labels)?.macro_avg.f1
        };
        let record = EpochRecord { epoch, train_loss: loss_sum / train_set.len() as f64, dev_f1 };
        on_epoch(&record);
        history.push(record);
    }
    Ok(TrainOutcome { params, history })
}
