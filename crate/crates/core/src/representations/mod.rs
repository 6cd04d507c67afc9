//! Per-token feature channels and their composition into sentence matrices.

pub mod chars;
pub mod contextual;
pub mod pos_tags;
pub mod position;
pub mod stack;
pub mod static_table;

use thiserror::Error;

pub use chars::{CharChannel, CharConfig, CharVocab};
pub use contextual::{read_ctx_store, write_ctx_store, ContextualStore, CtxManifest};
pub use pos_tags::{pos_onehot, PosSidecar, PosTagChannel, UNIVERSAL_TAGS};
pub use position::{clip_distance, relative_positions, PositionChannel};
pub use stack::{AuxData, Channel, EpochsProfile, RepresentationStack, SentenceMatrix};
pub use static_table::{load_static_text, StaticTable};

#[derive(Debug, Error)]
pub enum ReprError {
    #[error("line {line}: expected {expected} values, found {found}")]
    DimMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: unparsable number")]
    BadNumber { line: usize },
    #[error("embedding file holds no vectors")]
    EmptyFile,
    #[error("not a CTXV1 file (bad magic)")]
    BadMagic,
    #[error("unsupported CTXV version {0}")]
    UnsupportedVersion(u8),
    #[error("CTXV1 file truncated")]
    TruncatedFile,
    #[error("duplicate sentence id {0}")]
    DuplicateSentenceId(u64),
    #[error("sentence id {0} does not fit in 32 bits")]
    IdOutOfRange(u64),
    #[error("manifest dim {manifest} != header dim {header}")]
    ManifestMismatch { manifest: usize, header: usize },
    #[error("bad manifest: {0}")]
    BadManifest(String),
    #[error("POS sidecar line {line}: expected `id<TAB>tags`")]
    BadPosLine { line: usize },
    #[error("no contextual vectors for sentence {0}")]
    MissingContextual(u64),
    #[error("no POS tags for sentence {0}")]
    MissingPosTags(u64),
    #[error("sentence {id}: {source_kind} data has {found} tokens, corpus has {expected}")]
    TokenCountMismatch { id: u64, source_kind: &'static str, expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}
