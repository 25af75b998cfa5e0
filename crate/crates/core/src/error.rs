use thiserror::Error;

/// Errors raised when an input violates an operation's preconditions.
///
/// Infeasibility of a well-posed problem is never an error; it is reported
/// through the outcome types of the deciding operation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not hermitian (residual {residual:.3e})")]
    NonHermitian { residual: f64 },

    #[error("operator {index} is not normal (residual {residual:.3e})")]
    NonNormal { index: usize, residual: f64 },

    #[error("operators {first} and {second} do not commute (residual {residual:.3e})")]
    NonCommuting { first: usize, second: usize, residual: f64 },

    #[error("vectors {first} and {second} of the {set} set are not orthogonal (|<.,.>| = {residual:.3e})")]
    NotOrthogonal {
        set: &'static str,
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("vector {index} of the {set} set is zero (norm {norm:.3e})")]
    ZeroVector { set: &'static str, index: usize, norm: f64 },

    #[error("norm mismatch at pair {index}: |x| = {x_norm}, |y| = {y_norm}")]
    NormMismatch { index: usize, x_norm: f64, y_norm: f64 },

    #[error("the vector lists have different lengths ({xs} vs {ys})")]
    LengthMismatch { xs: usize, ys: usize },

    #[error("map is not a conjugation (symmetry {symmetry:.3e}, unitarity {unitarity:.3e})")]
    NotConjugation { symmetry: f64, unitarity: f64 },

    #[error("constraints are inconsistent: {reason} (residual {residual:.3e})")]
    Inconsistent { reason: &'static str, residual: f64 },

    #[error("selector index {index} is out of range for {atoms} atoms")]
    InvalidSelector { index: usize, atoms: usize },

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(&'static str),

    #[error("skew mode requires exactly one operator, found {0}")]
    SkewOperatorCount(usize),

    #[error("operation expects {expected} mode")]
    WrongMode { expected: &'static str },

    #[error("perturbation requires exactly one pair, found {0}")]
    NotSingleton(usize),

    #[error("skew perturbation requires linearly independent x and y")]
    CollinearPair,

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("function table shape mismatch: {0}")]
    Shape(String),

    #[error("measure is not symmetric under z -> -z")]
    NonSymmetricMeasure,

    #[error("unitary field leaks mass off the atom blocks (residual {residual:.3e})")]
    BlockExtraction { residual: f64 },

    #[error("construction residual {name} = {residual:.3e} exceeds tolerance")]
    Construction { name: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
