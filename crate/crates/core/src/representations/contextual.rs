//! CTXV1 sidecar files of precomputed per-token contextual vectors.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                 |
//! |--------|------|-----------------------|
//! | 0      | 4    | magic `CTXV`          |
//! | 4      | 1    | version (1)           |
//! | 5      | 4    | dim (u32)             |
//! | 9      | 4    | sentence count (u32)  |
//!
//! followed by, per sentence, `u32 id`, `u32 token_count` and
//! `token_count * dim` f32 values. A JSON manifest `{model_id, dim,
//! corpus_hash}` is stored next to the file as `<file>.manifest.json`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ReprError;

pub const CTX_MAGIC: &[u8; 4] = b"CTXV";
pub const CTX_VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtxManifest {
    pub model_id: String,
    pub dim: usize,
    pub corpus_hash: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContextualStore {
    dim: usize,
    model_id: String,
    vectors: BTreeMap<u64, Vec<f32>>,
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".manifest.json");
    PathBuf::from(os)
}

impl ContextualStore {
    pub fn new(dim: usize, model_id: &str) -> Self {
        Self { dim, model_id: model_id.to_string(), vectors: BTreeMap::new() }
    }

    /// Add a sentence given as `token_count * dim` row-major values.
    pub fn insert(&mut self, id: u64, data: Vec<f32>) -> Result<(), ReprError> {
        if self.dim == 0 || data.len() % self.dim != 0 {
            return Err(ReprError::DimMismatch { line: 0, expected: self.dim, found: data.len() });
        }
        if self.vectors.contains_key(&id) {
            return Err(ReprError::DuplicateSentenceId(id));
        }
        self.vectors.insert(id, data);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.vectors.keys().copied()
    }

    pub fn token_count(&self, id: u64) -> Option<usize> {
        self.vectors.get(&id).map(|v| v.len() / self.dim)
    }

    /// Per-token vectors of sentence `id`.
    pub fn sentence(&self, id: u64) -> Option<Vec<&[f32]>> {
        self.vectors.get(&id).map(|v| v.chunks(self.dim).collect())
    }

    pub fn token(&self, id: u64, index: usize) -> Option<&[f32]> {
        let v = self.vectors.get(&id)?;
        v.get(index * self.dim..(index + 1) * self.dim)
    }

    pub fn read_from<R: Read>(mut reader: R, model_id: &str) -> Result<Self, ReprError> {
        let truncated = |e: std::io::Error| match e.kind() {
            ErrorKind::UnexpectedEof => ReprError::TruncatedFile,
            _ => ReprError::Io { path: String::new(), source: e },
        };
        let mut header = [0u8; 13];
        // A file shorter than the magic is not a CTXV1 file at all.
        let mut got = 0;
        while got < header.len() {
            match reader.read(&mut header[got..]) {
                Ok(0) => break,
                Ok(n) => got += n,
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(truncated(e)),
            }
        }
        if got < 4 || &header[..4] != CTX_MAGIC {
            return Err(ReprError::BadMagic);
        }
        if got < header.len() {
            return Err(ReprError::TruncatedFile);
        }
        if header[4] != CTX_VERSION {
            return Err(ReprError::UnsupportedVersion(header[4]));
        }
        let dim = u32::from_le_bytes(header[5..9].try_into().unwrap()) as usize;
        let count = u32::from_le_bytes(header[9..13].try_into().unwrap());
        let mut store = Self::new(dim, model_id);
        let mut word = [0u8; 4];
        for _ in 0..count {
            reader.read_exact(&mut word).map_err(truncated)?;
            let id = u64::from(u32::from_le_bytes(word));
            reader.read_exact(&mut word).map_err(truncated)?;
            let tokens = u32::from_le_bytes(word) as usize;
            let mut bytes = vec![0u8; tokens * dim * 4];
            reader.read_exact(&mut bytes).map_err(truncated)?;
            let data = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
            if store.vectors.contains_key(&id) {
                return Err(ReprError::DuplicateSentenceId(id));
            }
            store.vectors.insert(id, data);
        }
        Ok(store)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), ReprError> {
        let io = |source| ReprError::Io { path: String::new(), source };
        w.write_all(CTX_MAGIC).map_err(io)?;
        w.write_all(&[CTX_VERSION]).map_err(io)?;
        w.write_all(&(self.dim as u32).to_le_bytes()).map_err(io)?;
        w.write_all(&(self.vectors.len() as u32).to_le_bytes()).map_err(io)?;
        for (&id, data) in &self.vectors {
            let id32 = u32::try_from(id).map_err(|_| ReprError::IdOutOfRange(id))?;
            w.write_all(&id32.to_le_bytes()).map_err(io)?;
            w.write_all(&((data.len() / self.dim) as u32).to_le_bytes()).map_err(io)?;
            for x in data {
                w.write_all(&x.to_le_bytes()).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }
}

/// Read a CTXV1 file, taking `model_id` from its manifest when present.
pub fn read_ctx_store(path: &Path) -> Result<ContextualStore, ReprError> {
    let with_path = |e: ReprError| match e {
        ReprError::Io { source, .. } => ReprError::Io { path: path.display().to_string(), source },
        other => other,
    };
    let manifest = read_manifest(path)?;
    let fallback = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let model_id = manifest.as_ref().map(|m| m.model_id.clone()).unwrap_or(fallback);
    let file = File::open(path).map_err(|source| ReprError::Io { path: path.display().to_string(), source })?;
    let store = ContextualStore::read_from(BufReader::new(file), &model_id).map_err(with_path)?;
    if let Some(m) = manifest {
        if m.dim != store.dim {
            return Err(ReprError::ManifestMismatch { manifest: m.dim, header: store.dim });
        }
    }
    Ok(store)
}

pub fn read_manifest(path: &Path) -> Result<Option<CtxManifest>, ReprError> {
    let mp = manifest_path(path);
    if !mp.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&mp).map_err(|source| ReprError::Io { path: mp.display().to_string(), source })?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| ReprError::BadManifest(e.to_string()))
}

/// Write the CTXV1 file and its manifest.
pub fn write_ctx_store(path: &Path, store: &ContextualStore, corpus_hash: &str) -> Result<(), ReprError> {
    let io = |source| ReprError::Io { path: path.display().to_string(), source };
    let file = File::create(path).map_err(io)?;
    store.write_to(BufWriter::new(file))?;
    let manifest = CtxManifest { model_id: store.model_id.clone(), dim: store.dim, corpus_hash: corpus_hash.to_string() };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| ReprError::BadManifest(e.to_string()))?;
    std::fs::write(manifest_path(path), json).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_sentence() -> ContextualStore {
        let mut s = ContextualStore::new(4, "toy");
        s.insert(7, (0..12).map(|x| x as f32).collect()).unwrap();
        s
    }

    fn bytes(store: &ContextualStore) -> Vec<u8> {
        let mut b = Vec::new();
        store.write_to(&mut b).unwrap();
        b
    }

    #[test]
    fn layout_is_bit_exact() {
        let b = bytes(&one_sentence());
        assert_eq!(&b[..4], b"CTXV");
        assert_eq!(b[4], 1);
        assert_eq!(&b[5..9], &4u32.to_le_bytes());
        assert_eq!(&b[9..13], &1u32.to_le_bytes());
        assert_eq!(&b[13..17], &7u32.to_le_bytes());
        assert_eq!(&b[17..21], &3u32.to_le_bytes());
        assert_eq!(&b[21..25], &0.0f32.to_le_bytes());
        assert_eq!(&b[25..29], &1.0f32.to_le_bytes());
        assert_eq!(b.len(), 13 + 8 + 12 * 4);
    }

    #[test]
    fn read_back() {
        let s = ContextualStore::read_from(bytes(&one_sentence()).as_slice(), "toy").unwrap();
        let v = s.sentence(7).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.iter().all(|t| t.len() == 4));
        assert_eq!(v[2], &[8.0, 9.0, 10.0, 11.0]);
    }

    #[test]
    fn bad_magic() {
        let mut b = bytes(&one_sentence());
        b[0] = b'X';
        assert!(matches!(ContextualStore::read_from(b.as_slice(), "x"), Err(ReprError::BadMagic)));
        assert!(matches!(ContextualStore::read_from(&b"CT"[..], "x"), Err(ReprError::BadMagic)));
    }

    #[test]
    fn truncated() {
        let b = bytes(&one_sentence());
        for cut in [10, 15, 19, b.len() - 1] {
            assert!(
                matches!(ContextualStore::read_from(&b[..cut], "x"), Err(ReprError::TruncatedFile)),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn duplicate_id() {
        let mut b = bytes(&one_sentence());
        let record = b[13..].to_vec();
        b.extend_from_slice(&record);
        b[9..13].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            ContextualStore::read_from(b.as_slice(), "x"),
            Err(ReprError::DuplicateSentenceId(7))
        ));
    }

    #[test]
    fn file_and_manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("flair.ctxv");
        write_ctx_store(&p, &one_sentence(), "abc").unwrap();
        let s = read_ctx_store(&p).unwrap();
        assert_eq!(s.model_id(), "toy");
        assert_eq!(s, one_sentence());

        std::fs::write(manifest_path(&p), r#"{"model_id":"toy","dim":5,"corpus_hash":"abc"}"#).unwrap();
        assert!(matches!(read_ctx_store(&p), Err(ReprError::ManifestMismatch { .. })));
    }
}
