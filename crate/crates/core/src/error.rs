use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("cardinality mismatch: expected {expected} elements, got {actual}")]
    CardinalityMismatch { expected: usize, actual: usize },

    #[error("infeasible shape: cardinality {shape} is smaller than the data cardinality {data}")]
    InfeasibleShape { shape: usize, data: usize },

    #[error("cannot unfold {len} elements into {rows} rows")]
    NotDivisible { len: usize, rows: usize },

    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),

    #[error("TT core chain broken at core {core}: {detail}")]
    ShapeChainBroken { core: usize, detail: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no feasible shape: {0}")]
    NoFeasibleShape(String),

    #[error("genome orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("crossover point {point} outside 1..={max}")]
    BadCrossoverPoint { point: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("archive checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("malformed archive header: {0}")]
    MalformedHeader(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidShape(_) => "InvalidShape",
            Error::CardinalityMismatch { .. } => "CardinalityMismatch",
            Error::InfeasibleShape { .. } => "InfeasibleShape",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::ShapeMismatch(..) => "ShapeMismatch",
            Error::ShapeChainBroken { .. } => "ShapeChainBroken",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::NoFeasibleShape(_) => "NoFeasibleShape",
            Error::OrderMismatch(..) => "OrderMismatch",
            Error::BadCrossoverPoint { .. } => "BadCrossoverPoint",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::ChecksumMismatch { .. } => "ChecksumMismatch",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::Io(_) => "IoFailure",
        }
    }
}
