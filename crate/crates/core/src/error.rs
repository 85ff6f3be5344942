use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("latent space is empty ({rows}x{cols})")]
    EmptySpace { rows: usize, cols: usize },

    #[error("index {index} out of range for space with {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate index {index}")]
    DuplicateIndex { index: usize },

    #[error("anchor lists differ in length ({source_len} vs {target_len})")]
    AnchorLengthMismatch {
        source_len: usize,
        target_len: usize,
    },

    #[error("anchor correspondence is empty")]
    NoAnchors,

    #[error("cannot pad a {from}-dimensional space down to {to} dimensions")]
    ShrinkForbidden { from: usize, to: usize },

    #[error("standard scaling needs at least 2 anchors, got {found}")]
    TooFewAnchors { found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("anchors are degenerate (largest singular value {sigma_max:e})")]
    DegenerateAnchors { sigma_max: f64 },

    #[error("singular value decomposition failed to converge")]
    SvdFailure,

    #[error("anchor row {row} has zero norm")]
    ZeroNormAnchor { row: usize },

    #[error("labels contain a single class")]
    SingleClass,

    #[error("rescaling factor must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("bottleneck {bottleneck} must be smaller than data dimension {dim} and at most the sample count {count}")]
    BottleneckTooLarge {
        bottleneck: usize,
        dim: usize,
        count: usize,
    },

    #[error("requested {k} anchors but the pool holds only {pool}")]
    KTooLarge { k: usize, pool: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),

    #[error("unknown tensor format version {0}")]
    UnknownVersion(u32),

    #[error("unknown dtype code {0}")]
    UnknownDtype(u8),

    #[error("unsupported tensor rank {0}")]
    BadRank(u8),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },

    #[error("trailing bytes after payload: expected {expected} bytes, found {found}")]
    TrailingBytes { expected: u64, found: u64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("translator schema error: {0}")]
    Schema(String),

    #[error("unsupported translator format version {0}")]
    Version(u64),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// `0` success, `2` usage, `3` data or precondition, `4` numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 2,
            Error::DegenerateAnchors { .. } | Error::SvdFailure => 4,
            _ => 3,
        }
    }
}
