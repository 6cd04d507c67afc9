//! Character-level word features: embed characters, convolve a fixed window,
//! max-pool over positions.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::tensor::{axpy, dot, Scalar, Tensor};

pub const CHAR_PAD: usize = 0;
pub const CHAR_UNK: usize = 1;

/// Character inventory: slot 0 pads, slot 1 is unknown, then sorted chars.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CharVocab {
    index: BTreeMap<char, usize>,
}

impl CharVocab {
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let chars: std::collections::BTreeSet<char> = words.into_iter().flat_map(str::chars).collect();
        let index = chars.into_iter().enumerate().map(|(i, c)| (c, i + 2)).collect();
        Self { index }
    }

    pub fn from_dataset(ds: &Dataset) -> Self {
        Self::from_words(ds.sentences.iter().flat_map(|s| s.words()))
    }

    pub fn len(&self) -> usize {
        self.index.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Character ids of `word`, right-padded to at least `width` entries.
    pub fn encode(&self, word: &str, width: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = word.chars().map(|c| self.index.get(&c).copied().unwrap_or(CHAR_UNK)).collect();
        while ids.len() < width {
            ids.push(CHAR_PAD);
        }
        ids
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharConfig {
    pub char_dim: usize,
    pub conv_width: usize,
    pub out_dim: usize,
}

impl Default for CharConfig {
    fn default() -> Self {
        Self { char_dim: 16, conv_width: 3, out_dim: 16 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharChannel {
    pub config: CharConfig,
    pub vocab: Arc<CharVocab>,
}

/// Borrowed view of the three character-channel tensors.
#[derive(Clone, Copy)]
pub struct CharParams<'a, T> {
    /// `[vocab, char_dim]`
    pub table: &'a Tensor<T>,
    /// `[out_dim, conv_width * char_dim]`
    pub filters: &'a Tensor<T>,
    /// `[out_dim]`
    pub bias: &'a Tensor<T>,
}

pub struct CharGrads<'a, T> {
    pub table: &'a mut Tensor<T>,
    pub filters: &'a mut Tensor<T>,
    pub bias: &'a mut Tensor<T>,
}

impl CharChannel {
    pub fn new(config: CharConfig, vocab: Arc<CharVocab>) -> Self {
        Self { config, vocab }
    }

    pub fn out_dim(&self) -> usize {
        self.config.out_dim
    }

    fn window<T: Scalar>(&self, ids: &[usize], p: usize, table: &Tensor<T>) -> Vec<T> {
        let cd = self.config.char_dim;
        let mut win = Vec::with_capacity(self.config.conv_width * cd);
        for &c in &ids[p..p + self.config.conv_width] {
            win.extend_from_slice(&table.data()[c * cd..(c + 1) * cd]);
        }
        win
    }

    /// Max-pooled filter responses and, per filter, the first maximal position.
    fn responses<T: Scalar>(&self, word: &str, params: CharParams<'_, T>) -> (Vec<usize>, Vec<T>, Vec<usize>) {
        let ids = self.vocab.encode(word, self.config.conv_width);
        let positions = ids.len() - self.config.conv_width + 1;
        let windows: Vec<Vec<T>> = (0..positions).map(|p| self.window(&ids, p, params.table)).collect();
        let mut best = vec![T::neg_infinity(); self.config.out_dim];
        let mut arg = vec![0usize; self.config.out_dim];
        for f in 0..self.config.out_dim {
            let w = params.filters.row(f);
            for (p, win) in windows.iter().enumerate() {
                let z = dot(w, win) + params.bias.data()[f];
                if z > best[f] {
                    best[f] = z;
                    arg[f] = p;
                }
            }
        }
        (ids, best, arg)
    }

    pub fn forward<T: Scalar>(&self, word: &str, params: CharParams<'_, T>) -> Vec<T> {
        self.responses(word, params).1
    }

    /// Accumulate gradients for upstream gradient `upstream` on this word's output.
    pub fn backward<T: Scalar>(&self, word: &str, upstream: &[T], params: CharParams<'_, T>, grads: CharGrads<'_, T>) {
        let (ids, _, arg) = self.responses(word, params);
        let cd = self.config.char_dim;
        for (f, &g) in upstream.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            let p = arg[f];
            grads.bias.data_mut()[f] += g;
            let win = self.window(&ids, p, params.table);
            axpy(g, &win, grads.filters.row_mut(f));
            let w = params.filters.row(f);
            for k in 0..self.config.conv_width {
                let c = ids[p + k];
                axpy(g, &w[k * cd..(k + 1) * cd], &mut grads.table.data_mut()[c * cd..(c + 1) * cd]);
            }
        }
    }
}
