//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, evaluation and checking.
#[derive(Debug, Error)]
pub enum Error {
    /// Evaluation at a point of the critical hypersurface (f = 0).
    #[error("pole: evaluation at a zero of the defining function (x = {0})")]
    Pole(f64),

    /// Vector or point length does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A leaf point lies outside the leaf polytope.
    #[error("leaf point {0:?} is not inside the leaf polytope")]
    LeafMembership(Vec<f64>),

    /// The least-squares design matrix is singular beyond tolerance.
    #[error("rank-deficient design matrix (condition beyond {0:e})")]
    RankDeficient(f64),

    /// Too few samples for the requested basis.
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    /// The profile matching system could not be solved.
    #[error("profile matching system is singular for order {0}")]
    ProfileSolve(usize),

    /// An invalid numeric parameter (non-positive width, zero weight, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A density whose nondegeneracy assumption fails.
    #[error("degenerate form: {0}")]
    DegenerateForm(String),

    /// Perturbation with θ-dependent jets of order below m.
    #[error("rejected perturbation: {0}")]
    RejectedPerturbation(String),

    /// Flow step too large for the grid.
    #[error("step violation: |v| dt = {step:.3e} exceeds grid pitch {pitch:.3e}")]
    StepTooLarge { step: f64, pitch: f64 },

    /// Convex-hull input is empty or below the minimum point count.
    #[error("hull input: {0}")]
    HullInput(String),

    /// Scenario schema problem (parse error or invariant violation).
    #[error("schema: {0}")]
    Schema(String),

    /// Standing-assumption validation failed (reported, then mapped to exit 3).
    #[error("model validation failed: {0}")]
    Validation(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
