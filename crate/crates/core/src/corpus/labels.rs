use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset};

pub const OTHER_LABEL: &str = "Other";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DirectionPolicy {
    /// `X(e1,e2)` and `X(e2,e1)` share one class.
    #[default]
    Collapse,
    /// Directed variants are distinct classes.
    Keep,
}

/// Ordered class inventory built from a training split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    names: Vec<String>,
    negative_index: Option<usize>,
    direction_policy: DirectionPolicy,
}

/// Strip a trailing `(e1,e2)` / `(e2,e1)` direction marker.
pub fn undirected(label: &str) -> &str {
    label
        .strip_suffix("(e1,e2)")
        .or_else(|| label.strip_suffix("(e2,e1)"))
        .unwrap_or(label)
}

impl LabelSet {
    /// Classes are the sorted set of canonical labels seen in `train`.
    pub fn from_dataset(train: &Dataset, policy: DirectionPolicy) -> Self {
        Self::from_labels(train.sentences.iter().map(|s| s.label.as_str()), policy)
    }

    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>, policy: DirectionPolicy) -> Self {
        let names: BTreeSet<String> = labels
            .into_iter()
            .map(|l| canonical(l, policy).to_string())
            .collect();
        let names: Vec<String> = names.into_iter().collect();
        let negative_index = names.iter().position(|n| n == OTHER_LABEL);
        Self { names, negative_index, direction_policy: policy }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn negative_index(&self) -> Option<usize> {
        self.negative_index
    }

    pub fn direction_policy(&self) -> DirectionPolicy {
        self.direction_policy
    }

    pub fn encode(&self, label: &str) -> Option<usize> {
        let key = canonical(label, self.direction_policy);
        self.names.binary_search_by(|n| n.as_str().cmp(key)).ok()
    }

    pub fn decode(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }
}

fn canonical(label: &str, policy: DirectionPolicy) -> &str {
    match policy {
        DirectionPolicy::Collapse => undirected(label),
        DirectionPolicy::Keep => label,
    }
}

/// Class index for every sentence of `dataset` under `labels`.
pub fn encode_labels(dataset: &Dataset, labels: &LabelSet) -> Result<Vec<usize>, CorpusError> {
    dataset
        .sentences
        .iter()
        .map(|s| {
            labels.encode(&s.label).ok_or_else(|| CorpusError::UnknownLabel {
                id: s.id,
                label: s.label.clone(),
            })
        })
        .collect()
}
