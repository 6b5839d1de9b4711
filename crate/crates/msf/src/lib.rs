//! Matrix spectral factorization on the unit circle.
//!
//! Given a matrix-valued density `S(z)` that is Hermitian positive
//! definite at every point of the unit circle, this crate computes the
//! spectral factor `S₊(z)`: the analytic, outer matrix function with
//!
//! ```text
//! S(z) = S₊(z) · S₊(z)ᴴ,   |z| = 1,
//! ```
//!
//! unique up to a constant unitary factor on the right. Densities are
//! handled as samples on a power-of-two grid `z_j = e^{2πij/N_g}`, and
//! factors are returned both as grid samples and as Laurent coefficients.
//!
//! Two drivers compute the same factor: a stage-by-stage triangular
//! elimination (one row block at a time), and a block-doubling scheme that
//! repairs geometrically growing diagonal blocks and reaches the same
//! result in logarithmically many levels — much faster for large matrix
//! dimensions. Both rest on a paraunitary completion step that converts a
//! one-sided (anti-analytic) defect row into a multiplier that is unitary
//! on the whole circle.

pub mod bench;
pub mod classic;
pub mod completion;
pub mod config;
pub mod density;
pub mod doubling;
mod driver;
pub mod error;
pub mod fft;
pub mod io;
pub mod laurent;
pub mod mat;
pub mod metrics;
pub mod report;
pub mod scalar;
pub mod seed;

pub use num_complex::Complex64;

pub use bench::{run_bench, Algorithm, BenchReport, BenchRow, BenchSpec};
pub use classic::{classic_factorize, ClassicRun};
pub use completion::{complete, defect_residual, split_defect, Completion};
pub use config::FactorConfig;
pub use density::{generate_density, GeneratorConfig, SplitMix64};
pub use doubling::{doubling_factorize, DoublingRun};
pub use driver::{PhaseTimings, StepInfo};
pub use error::{Error, Result};
pub use laurent::{GridSamples, LaurentPoly};
pub use mat::Mat;
pub use metrics::{anti_leakage, constant_gauge, factor_residual, outer_defect, unitary_defect};
pub use report::FactorReport;
pub use scalar::{factorize_scalar, ScalarFactor};
pub use seed::seed_factor;
