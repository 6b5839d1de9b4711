//! Error type shared across the crate.
//!
//! Numerical failures carry enough context to locate the offending grid node,
//! stage, or level; format failures name the byte offset. The distinction
//! matters to the CLI, which maps configuration/format problems to exit
//! code 2 and numerical failures to exit code 3.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input samples are not Hermitian at some grid node.
    #[error("matrix at grid node {node} is not Hermitian (residual {residual:.3e})")]
    NotHermitian { node: usize, residual: f64 },

    /// Pointwise Cholesky failed: the density is not positive definite.
    #[error("matrix at grid node {node} is not positive definite (pivot {pivot} non-positive)")]
    NotPositiveDefinite { node: usize, pivot: usize },

    /// A scalar density sample is zero or negative; its logarithm is undefined.
    #[error("scalar density sample at grid node {node} is not positive ({value:.3e})")]
    NonPositiveSample { node: usize, value: f64 },

    /// The grid mean of log s dips below the configured floor, so the
    /// density is treated as violating the integrable-logarithm condition.
    /// `diag` names the diagonal entry whose density failed (0 for a scalar
    /// factorization outside any matrix pipeline).
    #[error("log-integrability check failed for diagonal {diag}: mean log sample {mean_log:.3e} below floor {floor:.3e}")]
    PaleyWienerFail { diag: usize, mean_log: f64, floor: f64 },

    /// exp overflowed while building a scalar factor.
    #[error("overflow in exp while exponentiating the analytic half at node {node}")]
    OverflowInExp { node: usize },

    /// Pointwise inversion of f on the oversampled grid is too ill-conditioned.
    #[error("f is near-singular on the oversampled grid at node {node} (smallest singular value {sigma:.3e})")]
    FNearSingularOnGrid { node: usize, sigma: f64 },

    /// The Gram matrix of the raw completion must be constant across grid
    /// nodes; a violation signals a solver bug, not bad data.
    #[error("Gram matrix of the raw completion varies across nodes by {deviation:.3e} (tolerance {tolerance:.3e})")]
    GramNotConstant { deviation: f64, tolerance: f64 },

    /// The constant Gram matrix is numerically singular.
    #[error("Gram matrix of the raw completion is not positive definite (eigenvalue ratio {eigen_ratio:.3e})")]
    GramNotPositive { eigen_ratio: f64 },

    /// The determinant of the completion is not constant-unimodular.
    #[error("completion determinant deviates from a unimodular constant by {deviation:.3e}")]
    DetNotConstant { deviation: f64 },

    /// Post-normalization check: the completed multiplier is not unitary
    /// on the grid. Only raised when product checks are enabled.
    #[error("completed multiplier is not unitary on the grid (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    NotParaunitary { residual: f64, tolerance: f64 },

    /// Check mode: the pointwise product `QQᴴ` drifted away from the input
    /// samples beyond the hard bound.
    #[error("factor product drifted from the input by {residual:.3e} (tolerance {tolerance:.3e})")]
    ProductDrift { residual: f64, tolerance: f64 },

    /// Check mode: the product of the defect row with its completed
    /// multiplier kept anti-analytic coefficient mass, i.e. the completion
    /// failed its purpose. Signals a broken split or solve, not bad data.
    #[error("repaired row product keeps anti-analytic mass {residual:.3e} (tolerance {tolerance:.3e})")]
    ProductNotAnalytic { residual: f64, tolerance: f64 },

    /// LAPACK solver returned a nonzero info code.
    #[error("Hermitian positive definite solve failed (LAPACK info {info})")]
    SolveFailed { info: i32 },

    /// LU elimination hit an exactly zero pivot.
    #[error("matrix is singular to working precision")]
    SingularMatrix,

    /// det S₊ vanishes at a grid node; the outer check is undefined there.
    #[error("determinant of the factor vanishes at grid node {node}")]
    DetVanishes { node: usize },

    /// Constant coefficient of f is singular below the configured floor.
    #[error("constant coefficient of f is near-singular (smallest singular value {sigma:.3e}, floor {floor:.3e})")]
    FConstantSingular { sigma: f64, floor: f64 },

    /// Wrapper locating a failure inside a stage of the column-by-column driver.
    #[error("stage {stage} failed: {source}")]
    StageFailed {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    /// Wrapper locating a failure inside a level/superblock of the doubling driver.
    #[error("level {level}, superblock {superblock} failed: {source}")]
    LevelFailed {
        level: usize,
        superblock: usize,
        #[source]
        source: Box<Error>,
    },

    /// Shapes disagree (grid sizes, matrix orders, coefficient counts).
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    /// Configuration violates an invariant (non-power-of-two grid, zero size, …).
    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },

    /// Byte-level format violation while parsing MSFC/MSFG data.
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors the CLI reports as usage/config/parse problems (exit 2)
    /// rather than numerical failures (exit 3).
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. }
                | Error::Format { .. }
                | Error::Io(_)
                | Error::DimensionMismatch { .. }
        )
    }

    /// Wraps an error with the stage index of the column-by-column driver.
    pub fn at_stage(self, stage: usize) -> Error {
        Error::StageFailed { stage, source: Box::new(self) }
    }

    /// Wraps an error with the level and superblock of the doubling driver.
    pub fn at_level(self, level: usize, superblock: usize) -> Error {
        Error::LevelFailed { level, superblock, source: Box::new(self) }
    }
}
