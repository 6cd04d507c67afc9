//! Synthetic corpora and configs shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use relrep::corpus::{EntitySpan, LabeledSentence};
use relrep::harness::{ChannelSpec, RunConfig, StackSpec};
use relrep::neuralnet::AdamConfig;
use relrep::rng::SplitMix64;

/// Relation keywords; the label of a sentence is fixed by the word between its nominals.
pub const KEYWORDS: [(&str, &str); 5] = [
    ("causes", "Cause-Effect(e1,e2)"),
    ("inside", "Content-Container(e1,e2)"),
    ("joins", "Member-Collection(e1,e2)"),
    ("produces", "Product-Producer(e2,e1)"),
    ("near", "Other"),
];

const FILLER: [&str; 12] = ["the", "a", "big", "old", "small", "red", "quiet", "some", "very", "blue", "then", "this"];
const NOUNS: [&str; 10] = ["storm", "box", "player", "factory", "river", "engine", "child", "tree", "crowd", "lamp"];

/// `n` sentences, labels cycling through `KEYWORDS`.
pub fn synthetic_sentences(n: usize, seed: u64) -> Vec<LabeledSentence> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|i| {
            let (kw, label) = KEYWORDS[i % KEYWORDS.len()];
            let mut words: Vec<&str> = Vec::new();
            for _ in 0..rng.below(3) {
                words.push(FILLER[rng.below(FILLER.len())]);
            }
            let e1 = words.len();
            words.push(NOUNS[rng.below(NOUNS.len())]);
            for _ in 0..rng.below(2) {
                words.push(FILLER[rng.below(FILLER.len())]);
            }
            words.push(kw);
            for _ in 0..rng.below(2) {
                words.push(FILLER[rng.below(FILLER.len())]);
            }
            let e2 = words.len();
            words.push(NOUNS[rng.below(NOUNS.len())]);
            words.push(".");
            LabeledSentence::from_words(
                1000 + i as u64,
                &words,
                EntitySpan::from_bounds(e1, e1),
                EntitySpan::from_bounds(e2, e2),
                label,
            )
        })
        .collect()
}

/// Raw SemEval text for `sentences`.
pub fn semeval_text(sentences: &[LabeledSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        writeln!(out, "{}", s.to_record()).unwrap();
    }
    out
}

/// Writes `train.txt` (first `n_train`) and `test.txt` (rest) under `dir`.
pub fn write_corpus(dir: &Path, n_train: usize, n_test: usize, seed: u64) -> (PathBuf, PathBuf) {
    let all = synthetic_sentences(n_train + n_test, seed);
    let train = dir.join("train.txt");
    let test = dir.join("test.txt");
    std::fs::write(&train, semeval_text(&all[..n_train])).unwrap();
    std::fs::write(&test, semeval_text(&all[n_train..])).unwrap();
    (train, test)
}

/// A small, fast config: one {random static, position} stack.
pub fn small_config(dir: &Path, n_train: usize, n_test: usize) -> RunConfig {
    let (train, test) = write_corpus(dir, n_train, n_test, 42);
    let mut cfg = RunConfig {
        train,
        test,
        sentence_len: 16,
        seeds: vec![1, 2, 3],
        out: dir.join("out"),
        workers: Some(1),
        stacks: vec![StackSpec {
            name: "baseline".into(),
            channels: vec![
                ChannelSpec::RandomStatic { dim: 20, seed: 5 },
                ChannelSpec::Position { max_dist: 10, dim: 3 },
            ],
        }],
        adam: AdamConfig { learning_rate: 0.01, ..AdamConfig::default() },
        ..RunConfig::default()
    };
    cfg.cnn.filters_per_width = Some(8);
    cfg.cnn.hidden_dim = Some(16);
    cfg.training.epochs = Some(4);
    cfg.training.batch_size = Some(10);
    cfg
}

pub fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_pretty_json()).unwrap();
    path
}
