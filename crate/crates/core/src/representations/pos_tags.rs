use std::collections::HashMap;
use std::path::Path;

use super::ReprError;

/// Universal POS tags, in the order of the UD v2 documentation.
pub const UNIVERSAL_TAGS: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN", "PUNCT", "SCONJ",
    "SYM", "VERB", "X",
];

/// One-hot POS features; the last slot is UNK.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosTagChannel {
    tagset: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for PosTagChannel {
    fn default() -> Self {
        Self::new(UNIVERSAL_TAGS.iter().copied())
    }
}

impl PosTagChannel {
    pub fn new<'a>(tags: impl IntoIterator<Item = &'a str>) -> Self {
        let mut tagset = Vec::new();
        let mut index = HashMap::new();
        for t in tags {
            if !index.contains_key(t) {
                index.insert(t.to_string(), tagset.len());
                tagset.push(t.to_string());
            }
        }
        Self { tagset, index }
    }

    pub fn tagset(&self) -> &[String] {
        &self.tagset
    }

    pub fn out_dim(&self) -> usize {
        self.tagset.len() + 1
    }

    pub fn unk_index(&self) -> usize {
        self.tagset.len()
    }

    pub fn slot(&self, tag: &str) -> usize {
        self.index.get(tag).copied().unwrap_or(self.unk_index())
    }
}

pub fn pos_onehot(tag: &str, channel: &PosTagChannel) -> Vec<f32> {
    let mut v = vec![0.0; channel.out_dim()];
    v[channel.slot(tag)] = 1.0;
    v
}

/// Token-aligned POS tags keyed by sentence id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PosSidecar {
    tags: HashMap<u64, Vec<String>>,
}

impl PosSidecar {
    pub fn insert(&mut self, id: u64, tags: Vec<String>) {
        self.tags.insert(id, tags);
    }

    pub fn get(&self, id: u64) -> Option<&[String]> {
        self.tags.get(&id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Lines of `sentence_id<TAB>tag1 tag2 ... tagN`.
    pub fn parse(text: &str) -> Result<Self, ReprError> {
        let mut out = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || ReprError::BadPosLine { line: i + 1 };
            let (id, tags) = line.split_once('\t').ok_or_else(bad)?;
            let id: u64 = id.trim().parse().map_err(|_| bad())?;
            if out.tags.contains_key(&id) {
                return Err(ReprError::DuplicateSentenceId(id));
            }
            out.insert(id, tags.split_whitespace().map(str::to_string).collect());
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self, ReprError> {
        let text = std::fs::read_to_string(path).map_err(|source| ReprError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }
}
