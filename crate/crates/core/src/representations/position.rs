use serde::{Deserialize, Serialize};

use crate::corpus::LabeledSentence;

/// Trainable relative-distance embeddings, one table per nominal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionChannel {
    pub max_dist: usize,
    pub dim_per_nominal: usize,
}

impl Default for PositionChannel {
    fn default() -> Self {
        Self { max_dist: 30, dim_per_nominal: 5 }
    }
}

impl PositionChannel {
    /// Rows per table: `2·max_dist + 1` distances plus the padding row.
    pub fn rows(&self) -> usize {
        2 * self.max_dist + 2
    }

    pub fn padding_row(&self) -> usize {
        2 * self.max_dist + 1
    }

    pub fn out_dim(&self) -> usize {
        2 * self.dim_per_nominal
    }
}

pub fn clip_distance(d: i64, max_dist: usize) -> i64 {
    d.clamp(-(max_dist as i64), max_dist as i64)
}

/// Table row for a signed token distance.
pub fn distance_row(d: i64, max_dist: usize) -> usize {
    (clip_distance(d, max_dist) + max_dist as i64) as usize
}

/// Raw signed distances `(i - head_e1, i - head_e2)` per token.
pub fn raw_distances(sentence: &LabeledSentence) -> Vec<(i64, i64)> {
    let (h1, h2) = (sentence.e1.head as i64, sentence.e2.head as i64);
    (0..sentence.len() as i64).map(|i| (i - h1, i - h2)).collect()
}

/// Per-token `(row_e1, row_e2)` lookups for the real tokens of `sentence`.
pub fn relative_positions(sentence: &LabeledSentence, max_dist: usize) -> Vec<(usize, usize)> {
    raw_distances(sentence)
        .into_iter()
        .map(|(a, b)| (distance_row(a, max_dist), distance_row(b, max_dist)))
        .collect()
}
