use thiserror::Error;

/// Errors raised by the library.
///
/// Everything except [`Error::InvariantViolation`] is an input error: the
/// caller handed over something malformed or out of range.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet must have between 1 and {max} variables, got {got}")]
    TooManyVariables { got: usize, max: usize },

    #[error("variable {index} has an empty value set")]
    EmptyValueSet { index: usize },

    #[error("alphabet has too many cells to enumerate")]
    AlphabetTooLarge,

    #[error("total mass is {sum}, expected 1 within {tolerance:e}")]
    NotNormalized { sum: f64, tolerance: f64 },

    #[error("negative or non-finite mass {mass} at cell {cell:?}")]
    NegativeMass { cell: Vec<u32>, mass: f64 },

    #[error("cell {cell:?} lies outside alphabet {sizes:?}")]
    OutOfAlphabet { cell: Vec<u32>, sizes: Vec<usize> },

    #[error("dense table has {got} entries, alphabet needs {expected}")]
    DenseLength { got: usize, expected: usize },

    #[error("variable subset is empty")]
    EmptySubset,

    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("variable {index} listed more than once")]
    DuplicateVariable { index: usize },

    #[error("subset has {got} variables, at least {needed} required")]
    SubsetTooSmall { got: usize, needed: usize },

    #[error("variable sets overlap")]
    OverlappingSets,

    #[error("distance of a variable with itself: both indices are {index}")]
    SameVariable { index: usize },

    #[error("information values in different units (log base {left} vs {right})")]
    UnitMismatch { left: f64, right: f64 },

    #[error("invalid logarithm base {0}: must be finite and > 1")]
    InvalidBase(f64),

    #[error("chain needs at least 3 variables, got {0}")]
    ChainTooShort(usize),

    #[error("search bound {n_max} is smaller than base {base}")]
    SearchBoundTooSmall { base: u64, n_max: u64 },

    #[error("{what}: {requested} exceeds budget {budget}")]
    BudgetExceeded { what: &'static str, requested: u128, budget: u128 },

    #[error("expected alphabet {expected:?}, got {got:?}")]
    WrongAlphabet { expected: Vec<usize>, got: Vec<usize> },

    #[error("input is empty")]
    EmptyInput,

    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumericCell { row: usize, column: usize, value: String },

    #[error("row {row}, column {column}: missing value")]
    MissingValue { row: usize, column: usize },

    #[error("number of bins must be at least 1")]
    ZeroBins,

    #[error("column {column}: {bins} bins requested for {samples} samples")]
    TooManyBins { column: usize, bins: usize, samples: usize },

    #[error("column {column} has non-integer value {value}, which pass-through binning cannot index")]
    NonIntegerForNone { column: usize, value: f64 },

    #[error("bin specification lists {got} variables, dataset has {expected}")]
    BinCountMismatch { got: usize, expected: usize },

    #[error("need at least {needed} variables, got {got}")]
    TooFewVariables { got: usize, needed: usize },

    #[error("k_max = {k_max} outside [2, {n}]")]
    KMaxOutOfRange { k_max: usize, n: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error signals a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::InvariantViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
