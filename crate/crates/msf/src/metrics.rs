//! Accuracy measures for computed spectral factors.
//!
//! Three numbers summarize a factorization of grid samples `S(z_j)`:
//!
//! * **factor residual** — the largest entry of `S(z_j) − Q(z_j)Q(z_j)ᴴ`
//!   over all nodes, measuring how exactly the product reproduces the
//!   input;
//! * **anti leakage** — the largest coefficient magnitude of the factor at
//!   strictly negative powers, measuring how far `Q` is from analytic;
//! * **outer defect** — the gap between `log|det Q(0)|` and the grid mean
//!   of `log|det Q(z_j)|`, which vanishes exactly when `det Q` is outer.
//!
//! [`constant_gauge`] compares two factors of the same density: they must
//! agree up to multiplication by a single constant matrix on the right,
//! and that matrix must be unitary.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laurent::GridSamples;
use crate::mat::{lu_det, lu_solve, Mat};

/// Largest entry modulus of `S(z_j) − Q(z_j)Q(z_j)ᴴ` over all grid nodes.
pub fn factor_residual(s: &GridSamples, factor: &GridSamples) -> f64 {
    assert_eq!(s.n_g(), factor.n_g(), "grid sizes must match");
    assert_eq!(s.r(), factor.r(), "matrix orders must match");
    s.nodes()
        .par_iter()
        .zip(factor.nodes().par_iter())
        .map(|(sn, qn)| qn.mul_adjoint(qn).sub(sn).max_abs())
        .reduce(|| 0.0f64, f64::max)
}

/// Largest coefficient magnitude of the factor at strictly negative
/// powers. The Nyquist coefficient is counted as the positive power
/// `N_g/2`, so the scan covers transform indices `N_g/2 + 1 .. N_g − 1`.
pub fn anti_leakage(factor: &GridSamples) -> f64 {
    let table = factor.coefficient_table();
    let n_g = table.len();
    table[n_g / 2 + 1..].iter().map(Mat::max_abs).fold(0.0f64, f64::max)
}

/// Gap between `log|det Q(0)|` and the grid mean of `log|det Q(z_j)|`.
///
/// `Q(0)` is read off as the constant Fourier coefficient (the node mean
/// of the samples). Fails with [`Error::DetVanishes`] if the determinant
/// is zero at some node; returns `+∞` if it vanishes at the origin.
pub fn outer_defect(factor: &GridSamples) -> Result<f64> {
    let r = factor.r();
    let n_g = factor.n_g();
    let mut c0 = Mat::zeros(r, r);
    let weight = num_complex::Complex64::new(1.0 / n_g as f64, 0.0);
    for node in factor.nodes() {
        c0.axpy(weight, node);
    }
    let log_at_origin = lu_det(&c0).norm().ln();

    let mut mean = 0.0f64;
    for (j, node) in factor.nodes().iter().enumerate() {
        let d = lu_det(node).norm();
        if d == 0.0 {
            return Err(Error::DetVanishes { node: j });
        }
        mean += d.ln();
    }
    mean /= n_g as f64;
    Ok((log_at_origin - mean).abs())
}

/// Constant right factor relating two factors of the same density.
///
/// Computes `W(z_j) = B(z_j)⁻¹ A(z_j)` at every node, so that
/// `A(z) = B(z) W(z)`; returns the node mean `W̄` together with the
/// largest entry deviation `max_j ‖W(z_j) − W̄‖`. For two valid factors
/// the deviation is small and `W̄` is unitary (check with
/// [`GridSamples::unitary_residual`] on a single-node sample or directly
/// via `W̄ W̄ᴴ − I`).
pub fn constant_gauge(a: &GridSamples, b: &GridSamples) -> Result<(Mat, f64)> {
    assert_eq!(a.n_g(), b.n_g(), "grid sizes must match");
    assert_eq!(a.r(), b.r(), "matrix orders must match");
    let r = a.r();
    let n_g = a.n_g();
    let per_node: Vec<Mat> = a
        .nodes()
        .par_iter()
        .zip(b.nodes().par_iter())
        .map(|(an, bn)| lu_solve(bn, an))
        .collect::<Result<_>>()?;
    let mut mean = Mat::zeros(r, r);
    let weight = num_complex::Complex64::new(1.0 / n_g as f64, 0.0);
    for w in &per_node {
        mean.axpy(weight, w);
    }
    let deviation =
        per_node.par_iter().map(|w| w.sub(&mean).max_abs()).reduce(|| 0.0f64, f64::max);
    Ok((mean, deviation))
}

/// Largest entry modulus of `W Wᴴ − I` for a single matrix.
pub fn unitary_defect(w: &Mat) -> f64 {
    let eye = Mat::identity(w.rows());
    w.mul_adjoint(w).sub(&eye).max_abs()
}
