//! Error type shared by every module in the crate.

use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Why an operation rejected its input.
///
/// Variants carry the indices needed to point at the offending region, edge,
/// or dimension; messages are written so a CLI can surface them directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An input matrix contained a NaN or infinity.
    NonFiniteInput { what: &'static str },
    /// A region's series has (near-)zero variance and cannot be z-scored.
    DegenerateSeries { region: usize },
    /// A column claimed to be z-scored has a nonzero mean or non-unit spread.
    NotStandardized { region: usize },
    /// An edge series has (near-)zero norm and no defined cosine similarity.
    DegenerateEdge { edge: usize },
    /// A matrix was smaller than the operation can accept.
    InvalidDimensions {
        what: &'static str,
        rows: usize,
        cols: usize,
    },
    /// A region pair was out of range or not strictly ordered.
    InvalidPair {
        i: usize,
        j: usize,
        n_regions: usize,
    },
    /// An edge index was outside 0..n_edges.
    InvalidEdgeIndex { edge: usize, n_edges: usize },
    /// Two operands had incompatible shapes for an operation.
    ShapeMismatch {
        op: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// The blocked kernel was asked for a zero block size.
    InvalidBlockSize,
    /// The blocked kernel cannot fit its working set in the given budget.
    BudgetTooSmall { required: u64, budget: u64 },
    /// A graph's parts were mutually inconsistent or violated an invariant.
    InvalidGraph { reason: &'static str },
    /// A configuration value was rejected.
    InvalidConfig { reason: &'static str },
    /// A class label was outside 0..n_classes.
    InvalidClass { class: usize, n_classes: usize },
    /// A dataset-level operation received no samples.
    EmptyDataset,
    /// Training data contains fewer than two distinct labels.
    SingleClass,
    /// Fewer samples than cross-validation folds.
    TooFewSamples { n_samples: usize, k: usize },
    /// Cross-validation needs at least two folds.
    InvalidFoldCount { k: usize },
    /// Two slices that must be index-aligned had different lengths.
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Error::NonFiniteInput { what } => {
                write!(f, "{what} contains a non-finite value")
            }
            Error::DegenerateSeries { region } => {
                write!(f, "region {region} has zero variance; z-score is undefined")
            }
            Error::NotStandardized { region } => {
                write!(
                    f,
                    "column {region} is not z-scored (nonzero mean or non-unit spread)"
                )
            }
            Error::DegenerateEdge { edge } => {
                write!(
                    f,
                    "edge series {edge} has zero norm; cosine similarity is undefined"
                )
            }
            Error::InvalidDimensions { what, rows, cols } => {
                write!(f, "{what} has unusable shape {rows}x{cols}")
            }
            Error::InvalidPair { i, j, n_regions } => {
                write!(
                    f,
                    "({i}, {j}) is not an ordered region pair for {n_regions} regions"
                )
            }
            Error::InvalidEdgeIndex { edge, n_edges } => {
                write!(f, "edge index {edge} is outside 0..{n_edges}")
            }
            Error::ShapeMismatch { op, expected, got } => {
                write!(
                    f,
                    "{op}: expected a {}x{} operand, got {}x{}",
                    expected.0, expected.1, got.0, got.1
                )
            }
            Error::InvalidBlockSize => write!(f, "block size must be at least 1"),
            Error::BudgetTooSmall { required, budget } => {
                write!(
                    f,
                    "blocked similarity needs {required} bytes but the budget is {budget}"
                )
            }
            Error::InvalidGraph { reason } => write!(f, "invalid graph: {reason}"),
            Error::InvalidConfig { reason } => write!(f, "invalid configuration: {reason}"),
            Error::InvalidClass { class, n_classes } => {
                write!(f, "class {class} is outside 0..{n_classes}")
            }
            Error::EmptyDataset => write!(f, "dataset is empty"),
            Error::SingleClass => {
                write!(f, "training data must contain at least two classes")
            }
            Error::TooFewSamples { n_samples, k } => {
                write!(f, "{n_samples} samples cannot be split into {k} folds")
            }
            Error::InvalidFoldCount { k } => {
                write!(f, "cross-validation needs at least 2 folds, got {k}")
            }
            Error::LengthMismatch { what, left, right } => {
                write!(f, "{what}: lengths differ ({left} vs {right})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
