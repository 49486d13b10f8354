use thiserror::Error;

/// Errors raised by the numeric solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("metric profile is not positive definite at xⁿ = {at}")]
    NotPositiveDefinite { at: f64 },

    #[error("step size underflow at t = {at}")]
    StepUnderflow { at: f64 },

    #[error("λ = {lambda} is numerically a Beltrami singular value for ξ = {xi:?} (condition {condition:.3e})")]
    BeltramiSingular {
        lambda: f64,
        xi: [f64; 2],
        condition: f64,
    },

    #[error("decay fit needs at least {needed} modes along one direction, got {got}")]
    InsufficientModes { needed: usize, got: usize },

    #[error("approach path does not approach the loop (closest distance {closest:.3e})")]
    NotApproaching { closest: f64 },

    #[error("probe patch meets a current loop (distance {distance:.3e})")]
    PatchIntersectsLoop { distance: f64 },

    #[error(transparent)]
    Symbol(#[from] beltrami_core::Error),
}

pub type Result<T> = std::result::Result<T, NumericsError>;
