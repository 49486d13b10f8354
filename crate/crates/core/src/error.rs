use thiserror::Error;

/// Errors raised by the symbolic pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("jet has zero constant term and cannot be inverted")]
    SingularJet,

    #[error("jet order exhausted: {what} needs order {needed}, have {available}")]
    OrderTooLow {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("no exact square root: constant term {0} is not a rational square")]
    NotASquare(String),

    #[error("metric jet is not in boundary normal form: {0}")]
    NotBoundaryNormal(String),

    #[error("metric is not positive definite at the base point")]
    NotPositiveDefinite,

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("symbol shapes are incompatible: {0}")]
    ShapeMismatch(String),

    #[error("symbols were built over different boundary metrics")]
    NormMismatch,

    #[error("evaluation at the zero covector")]
    ZeroCovector,

    #[error("symbol is not a polynomial of degree at most {max_degree} in the unit covector")]
    NotPolynomial { max_degree: usize },

    #[error("symbol series does not reach degree {needed} (bottom is {bottom})")]
    InsufficientDepth { needed: i32, bottom: i32 },

    #[error("direction set is degenerate: {0}")]
    DegenerateDirections(String),

    #[error(
        "affine system is rank deficient at stage {stage}: undetermined unknowns {undetermined:?}"
    )]
    RankDeficient {
        stage: usize,
        undetermined: Vec<String>,
    },

    #[error("observed data are inconsistent with the forward model at stage {stage}: {detail}")]
    InconsistentData { stage: usize, detail: String },

    #[error("forward map failed the affinity certificate at stage {stage}")]
    NotAffine { stage: usize },

    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
