//! Word2vec/GloVe text-format static embedding tables.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::rng::{fnv1a64, SplitMix64};

use super::ReprError;

/// Half-width of the uniform range for OOV vectors.
pub const OOV_RANGE: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct StaticTable {
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    oov_seed: u64,
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let count = it.next()?.parse().ok()?;
    let dim = it.next()?.parse().ok()?;
    it.next().is_none().then_some((count, dim))
}

impl StaticTable {
    pub fn new(dim: usize, oov_seed: u64) -> Self {
        Self { dim, index: HashMap::new(), data: Vec::new(), oov_seed }
    }

    /// Insert a vector; the first occurrence of a word wins.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> Result<(), ReprError> {
        if vector.len() != self.dim {
            return Err(ReprError::DimMismatch { line: 0, expected: self.dim, found: vector.len() });
        }
        if !self.index.contains_key(word) {
            self.index.insert(word.to_string(), self.index.len());
            self.data.extend_from_slice(vector);
        }
        Ok(())
    }

    /// Table of `words` with vectors drawn uniform(-0.25, 0.25) from `seed`.
    pub fn random<'a>(words: impl IntoIterator<Item = &'a str>, dim: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut table = Self::new(dim, seed);
        for w in words {
            let v: Vec<f32> = (0..dim).map(|_| rng.uniform(-OOV_RANGE, OOV_RANGE) as f32).collect();
            table.insert(w, &v).expect("dimension fixed by construction");
        }
        table
    }

    pub fn from_reader<R: BufRead>(reader: R, oov_seed: u64) -> Result<Self, ReprError> {
        let mut table: Option<StaticTable> = None;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|source| ReprError::Io { path: String::new(), source })?;
            if line.trim().is_empty() {
                continue;
            }
            if line_no == 1 {
                if let Some((_, dim)) = parse_header(&line) {
                    table = Some(StaticTable::new(dim, oov_seed));
                    continue;
                }
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("non-empty line");
            let values: Vec<f32> = fields
                .map(|f| f.parse::<f32>())
                .collect::<Result<_, _>>()
                .map_err(|_| ReprError::BadNumber { line: line_no })?;
            let t = table.get_or_insert_with(|| StaticTable::new(values.len(), oov_seed));
            if values.len() != t.dim || t.dim == 0 {
                return Err(ReprError::DimMismatch { line: line_no, expected: t.dim, found: values.len() });
            }
            t.insert(word, &values)?;
        }
        match table {
            Some(t) if !t.is_empty() => Ok(t),
            _ => Err(ReprError::EmptyFile),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn oov_seed(&self) -> u64 {
        self.oov_seed
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Stored vector for an exact (case-sensitive) match.
    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Exact match, then lowercase, then a seeded random OOV vector.
    pub fn lookup(&self, word: &str) -> Vec<f32> {
        let mut out = vec![0.0; self.dim];
        self.lookup_into(word, &mut out);
        out
    }

    pub fn lookup_into(&self, word: &str, out: &mut [f32]) {
        if let Some(v) = self.get(word).or_else(|| self.get(&word.to_lowercase())) {
            out.copy_from_slice(v);
            return;
        }
        let mut rng = SplitMix64::new(fnv1a64(word.as_bytes()) ^ self.oov_seed);
        for x in out.iter_mut() {
            *x = rng.uniform(-OOV_RANGE, OOV_RANGE) as f32;
        }
    }

    /// Flat copy of all stored vectors, in insertion order.
    pub fn raw_data(&self) -> &[f32] {
        &self.data
    }
}

pub fn load_static_text(path: &Path, oov_seed: u64) -> Result<StaticTable, ReprError> {
    let file = File::open(path).map_err(|source| ReprError::Io { path: path.display().to_string(), source })?;
    StaticTable::from_reader(BufReader::new(file), oov_seed).map_err(|e| match e {
        ReprError::Io { source, .. } => ReprError::Io { path: path.display().to_string(), source },
        other => other,
    })
}
