//! Tolerance and truncation knobs shared by every factorization entry point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical policy for a factorization run.
///
/// Every tolerance has a reasonable default; most callers use
/// [`FactorConfig::default`] and override individual fields with struct
/// update syntax:
///
/// ```
/// use msf::FactorConfig;
///
/// let cfg = FactorConfig { eps_tail: 1e-6, ..FactorConfig::default() };
/// assert!(cfg.validate().is_ok());
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactorConfig {
    /// Relative threshold for the per-step tail truncation order: the
    /// working order `N` is the smallest order such that every dropped
    /// anti-analytic coefficient has modulus below `eps_tail` times the
    /// largest coefficient modulus of the row block being repaired.
    /// Larger values shorten the linear systems (faster, at the price of
    /// a larger unrepaired tail); `N` is always capped at half the grid
    /// size.
    pub eps_tail: f64,

    /// Bound on the anti-analytic leakage allowed in a block that is
    /// required to be analytic (used by internal postcondition checks).
    pub tol_analytic: f64,

    /// Bound on the paraunitarity residual `max_j ‖U(z_j)U(z_j)ᴴ − I‖`
    /// accepted for a completed multiplier.
    pub tol_pu: f64,

    /// Bound on the node-to-node deviation of the Gram matrix
    /// `Ũ_raw·U_raw`, which the construction guarantees to be constant.
    /// Exceeding it indicates a broken linear solve, not bad data.
    pub tol_gram: f64,

    /// Bound on the node-to-node deviation of `det U(z_j)`, checked after
    /// the Gram normalization.
    pub tol_det: f64,

    /// Pointwise inversion of the diagonal block `f` rejects grid nodes
    /// whose smallest singular value falls below `sigma_floor_rel` times
    /// the largest constant-coefficient magnitude of `f`.
    pub sigma_floor_rel: f64,

    /// Relative eigenvalue floor for the inverse square root of the Gram
    /// matrix: eigenvalues below `gram_eigen_floor` times the largest one
    /// make the Gram matrix effectively singular and abort the run.
    pub gram_eigen_floor: f64,

    /// Floor on the grid mean of `log s` for each scalar density; a mean
    /// below this is treated as a log-integrability failure (the density
    /// effectively vanishes on part of the circle).
    pub pw_floor: f64,

    /// Relative bound on the Hermitian residual `max_j ‖S(z_j) − S(z_j)ᴴ‖`
    /// accepted by the input check, measured against `max_j ‖S(z_j)‖`.
    pub tol_herm: f64,

    /// When true, drivers re-multiply intermediate products and assert
    /// structural invariants at every stage or level. This is O(cost of
    /// the run) extra work; enable it when debugging, not in benchmarks.
    pub check_products: bool,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            eps_tail: 1e-14,
            tol_analytic: 1e-9,
            tol_pu: 1e-10,
            tol_gram: 1e-10,
            tol_det: 1e-10,
            sigma_floor_rel: 1e-12,
            gram_eigen_floor: 1e-14,
            pw_floor: -30.0,
            tol_herm: 1e-12,
            check_products: false,
        }
    }
}

impl FactorConfig {
    /// Rejects configurations that cannot drive a run: every tolerance
    /// must be a positive finite number (the log floor must be finite and
    /// negative).
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("eps_tail", self.eps_tail),
            ("tol_analytic", self.tol_analytic),
            ("tol_pu", self.tol_pu),
            ("tol_gram", self.tol_gram),
            ("tol_det", self.tol_det),
            ("sigma_floor_rel", self.sigma_floor_rel),
            ("gram_eigen_floor", self.gram_eigen_floor),
            ("tol_herm", self.tol_herm),
        ];
        for (name, value) in positives {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig {
                    message: format!("{name} must be positive and finite, got {value:e}"),
                });
            }
        }
        if !(self.pw_floor.is_finite() && self.pw_floor < 0.0) {
            return Err(Error::InvalidConfig {
                message: format!(
                    "pw_floor must be negative and finite, got {:e}",
                    self.pw_floor
                ),
            });
        }
        Ok(())
    }

    /// The analyticity bound actually enforced on repaired blocks: the
    /// configured `tol_analytic`, loosened when a coarse `eps_tail`
    /// deliberately leaves a larger tail than the default bound allows.
    /// Truncating the tail at relative size `eps_tail` leaves residues of
    /// that order in the repaired product, so the check tracks it.
    pub fn effective_tol_analytic(&self) -> f64 {
        self.tol_analytic.max(10.0 * self.eps_tail)
    }
}
