use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown generator preset `{0}` (expected lps5, diagonal:<phi> or file:<path>)")]
    UnknownPreset(String),

    #[error("failed to parse {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("generator {index} is not in SU(2): residual {residual:.3e} exceeds {tolerance:.1e}")]
    NonUnitary {
        index: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("symbol {symbol} outside alphabet 1..={alphabet}")]
    InvalidSymbol { symbol: u8, alphabet: usize },

    #[error("enumeration of {count} words exceeds cap {cap}")]
    EnumerationCap { count: u128, cap: u64 },

    #[error("truncation 2J = {two_j} exceeds the configured maximum {max}")]
    TruncationOverflow { two_j: u32, max: u32 },

    #[error("truncation mismatch: {0}")]
    TruncationMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("decay fit needs at least 4 points above 1e-12, found {0} (no usable points)")]
    NoUsablePoints(usize),

    #[error("observable is not real valued (imaginary residue {residue:.3e})")]
    NonReal { residue: f64 },

    #[error("sigma must be positive for non-constant samples (got {0})")]
    DegenerateSigma(f64),

    #[error("{0}")]
    Incomplete(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
