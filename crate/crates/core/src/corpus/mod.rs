//! SemEval-2010 Task 8 corpus handling: parsing, labels and splits.

mod labels;
mod semeval;
mod tokenize;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use labels::{encode_labels, undirected, DirectionPolicy, LabelSet, OTHER_LABEL};
pub use semeval::parse_semeval;
pub use tokenize::{tokenize, Token, DETACHED_PUNCT};

use crate::rng::{streams, SplitMix64};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed record (sentence id {id}): {reason}")]
    MalformedRecord { id: u64, reason: String },
    #[error("unknown label {label:?} in sentence {id}")]
    UnknownLabel { id: u64, label: String },
    #[error("dev fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("cannot split an empty dataset")]
    EmptyDataset,
    #[error("invalid sentence {id}: {reason}")]
    InvalidSentence { id: u64, reason: String },
    #[error("dataset JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Nominal span; `end` is inclusive and `head` is the last token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

impl EntitySpan {
    pub fn from_bounds(start: usize, end: usize) -> Self {
        Self { start, end, head: end }
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSentence {
    pub id: u64,
    pub tokens: Vec<Token>,
    pub e1: EntitySpan,
    pub e2: EntitySpan,
    pub label: String,
}

/// On-disk shape of a sentence in the prepared dataset file.
#[derive(Serialize, Deserialize)]
struct SentenceRecord {
    id: u64,
    tokens: Vec<String>,
    e1: EntitySpan,
    e2: EntitySpan,
    label: String,
}

impl LabeledSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn from_words(id: u64, words: &[&str], e1: EntitySpan, e2: EntitySpan, label: &str) -> Self {
        let tokens = words
            .iter()
            .enumerate()
            .map(|(index, w)| Token { text: (*w).to_string(), index })
            .collect();
        Self { id, tokens, e1, e2, label: label.to_string() }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |reason: &str| CorpusError::InvalidSentence { id: self.id, reason: reason.to_string() };
        for (i, t) in self.tokens.iter().enumerate() {
            if t.text.is_empty() || t.index != i {
                return Err(bad("tokens must be non-empty with consecutive indices"));
            }
        }
        for span in [&self.e1, &self.e2] {
            if !(span.start <= span.head && span.head <= span.end && span.end < self.tokens.len()) {
                return Err(bad("entity span out of bounds"));
            }
        }
        if self.e1.overlaps(&self.e2) {
            return Err(bad("entity spans overlap"));
        }
        Ok(())
    }

    /// Corpus-format rendering: tokens joined by spaces with entity tags re-inserted.
    pub fn to_marked_text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if i == self.e1.start {
                out.push_str("<e1>");
            }
            if i == self.e2.start {
                out.push_str("<e2>");
            }
            out.push_str(&t.text);
            if i == self.e1.end {
                out.push_str("</e1>");
            }
            if i == self.e2.end {
                out.push_str("</e2>");
            }
        }
        out
    }

    /// Two-line corpus record for this sentence.
    pub fn to_record(&self) -> String {
        format!("{}\t\"{}\"\n{}\n", self.id, self.to_marked_text(), self.label)
    }

    fn to_json_record(&self) -> SentenceRecord {
        SentenceRecord {
            id: self.id,
            tokens: self.tokens.iter().map(|t| t.text.clone()).collect(),
            e1: self.e1,
            e2: self.e2,
            label: self.label.clone(),
        }
    }

    fn from_json_record(r: SentenceRecord) -> Result<Self, CorpusError> {
        let words: Vec<&str> = r.tokens.iter().map(String::as_str).collect();
        let s = Self::from_words(r.id, &words, r.e1, r.e2, &r.label);
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub split: Split,
    pub sentences: Vec<LabeledSentence>,
}

impl Dataset {
    pub fn new(split: Split, sentences: Vec<LabeledSentence>) -> Self {
        Self { split, sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Serialize as the prepared-dataset JSON array.
    pub fn to_json(&self) -> Result<String, CorpusError> {
        let records: Vec<SentenceRecord> = self.sentences.iter().map(|s| s.to_json_record()).collect();
        Ok(serde_json::to_string_pretty(&records)?)
    }

    pub fn from_json(text: &str, split: Split) -> Result<Self, CorpusError> {
        let records: Vec<SentenceRecord> = serde_json::from_str(text)?;
        let sentences = records
            .into_iter()
            .map(LabeledSentence::from_json_record)
            .collect::<Result<_, _>>()?;
        Ok(Self::new(split, sentences))
    }

    /// Load either a prepared JSON dataset or a raw corpus file, by content sniffing.
    pub fn load(path: &Path, split: Split) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim_start().starts_with('[') {
            Self::from_json(&text, split)
        } else {
            parse_semeval(&text, split)
        }
    }

    /// Drop sentences whose label is the catch-all class.
    pub fn without_other(&self) -> Self {
        Self::new(
            self.split,
            self.sentences.iter().filter(|s| s.label != OTHER_LABEL).cloned().collect(),
        )
    }
}

/// Shuffle with the split stream of `seed`, then hold out the last ⌈fraction·N⌉ as dev.
pub fn split_train_dev(train: &Dataset, dev_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), CorpusError> {
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(dev_fraction));
    }
    if train.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let n = train.len();
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::stream(seed, streams::SPLIT).shuffle(&mut order);
    let n_dev = ((dev_fraction * n as f64).ceil() as usize).min(n);
    let pick = |idx: &[usize]| idx.iter().map(|&i| train.sentences[i].clone()).collect();
    Ok((
        Dataset::new(Split::Train, pick(&order[..n - n_dev])),
        Dataset::new(Split::Dev, pick(&order[n - n_dev..])),
    ))
}
