//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KflatError {
    #[error("singular input: smallest singular value {sigma_min:.3e} <= tolerance {tol:.3e}")]
    SingularInput { sigma_min: f64, tol: f64 },

    #[error("matrix is not Hermitian: ||M - M*|| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("path step too coarse at index {index}: ||u_(k+1) u_k^-1 - 1|| = {norm:.3e}")]
    StepTooCoarse { index: usize, norm: f64 },

    #[error("path marked closed but endpoints differ by {deviation:.3e}")]
    NotClosed { deviation: f64 },

    #[error("unknown generator symbol {symbol} for group of rank {rank}")]
    UnknownGenerator { symbol: i32, rank: usize },

    #[error("shape mismatch: ({r1}x{c1}) vs ({r2}x{c2})")]
    ShapeMismatch { r1: usize, c1: usize, r2: usize, c2: usize },

    #[error("group mismatch between operands")]
    GroupMismatch,

    #[error("propagation {actual} exceeds budget {budget}")]
    PropagationExceeded { actual: usize, budget: usize },

    #[error("grid too coarse: {got} < required {required}")]
    GridTooCoarse { got: usize, required: usize },

    #[error("defect {defect:.4} too large (threshold {threshold:.4})")]
    DefectTooLarge { defect: f64, threshold: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("polar breakdown: smallest eigenvalue of M*M is {lambda_min:.3e}")]
    PolarBreakdown { lambda_min: f64 },

    #[error("singular compression: singular value {sigma:.3e} on the range")]
    SingularCompression { sigma: f64 },

    #[error("cocycle is not exact: worst triangle deviation {deviation:.3e}")]
    InexactCocycle { deviation: f64 },

    #[error("partition-of-unity average is singular (sigma_min = {sigma_min:.3e})")]
    AveragingSingular { sigma_min: f64 },

    #[error("spectral gap at 1/2 closed: eigenvalue {eigenvalue:.4} inside the forbidden zone")]
    GapClosed { eigenvalue: f64 },

    #[error("cocycle not normalized on the tree: worst deviation {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("perturbation too far: ||p - q|| = {distance:.3e} >= defect {defect:.3e}")]
    TooFar { distance: f64, defect: f64 },

    #[error("quantitative budget exceeded: defect {defect:.4} >= 1/4")]
    BudgetExceeded { defect: f64 },

    #[error("truncation too coarse: certified defect {defect:.4} or residue {residue:.4} out of range")]
    TruncationTooCoarse { defect: f64, residue: f64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, KflatError>;
