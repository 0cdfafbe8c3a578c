use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O failure on '{path}': {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported TIFF feature: {0}")]
    UnsupportedTiffFeature(String),

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("dtype mismatch: {0}")]
    DtypeMismatch(String),

    #[error("bad magic {0:?}, expected \"BSF1\"")]
    BadMagic([u8; 4]),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("mask must be a single-band integer raster: {0}")]
    NonIntegerMask(String),

    #[error("invalid raster header: {0}")]
    InvalidHeader(String),

    #[error("invalid band stack: {0}")]
    InvalidStack(String),

    #[error("pixel ({x}, {y}) outside {width}x{height} grid")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("pixel ({x}, {y}) is masked invalid")]
    InvalidPixel { x: usize, y: usize },

    #[error("zero variance: correlation is undefined")]
    ZeroVariance,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("upsampling factor {0} not in {{1, 2, 3, 6}}")]
    BadFactor(usize),

    #[error("inconsistent plane dimensions: {0}")]
    InconsistentDims(String),

    #[error("stack is not harmonized; call harmonize() first")]
    NotHarmonized,

    #[error("missing band '{0}'")]
    MissingBand(String),

    #[error("water reference has zero variance over the selected bands")]
    ZeroVarianceReference,

    #[error("too few water pixels: found {found}, need at least {required}")]
    TooFewWaterPixels { found: usize, required: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate histogram: fewer than two distinct valid values")]
    DegenerateHistogram,

    #[error("label code {0} has no entry in the label mapping")]
    UnmappedCode(u16),

    #[error("no evaluated pixels")]
    NoEvaluatedPixels,

    #[error("coverage fraction {0} outside [0, 1]")]
    BadAlpha(f64),

    #[error("JSON error in '{path}': {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
