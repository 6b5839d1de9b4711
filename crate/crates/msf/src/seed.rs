//! Lower-triangular seed factor: pointwise Cholesky with outer diagonal.
//!
//! The first stage of every matrix factorization builds, node by node, a
//! lower-triangular `Q(z_j)` with `Q(z_j)Q(z_j)ᴴ = S(z_j)` whose diagonal
//! entries are outer scalar factors. Pointwise Cholesky alone gives the
//! identity with a *positive* diagonal, but each diagonal entry of the
//! Cholesky factor is then only determined up to phase per node and has no
//! analytic structure. Rescaling column `m` by the unimodular function
//!
//! ```text
//! u_m(z_j) = (d_m)₊(z_j) / M_mm(z_j),   d_m = |M_mm|²,
//! ```
//!
//! where `(d_m)₊` is the outer factor of the scalar density `d_m`, leaves
//! `QQᴴ = S` untouched (`|u_m| ≡ 1`) and pins the diagonal to outer
//! functions — the gauge every later repair stage relies on.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::FactorConfig;
use crate::error::{Error, Result};
use crate::laurent::GridSamples;
use crate::mat::{cholesky_lower, Mat};

/// Builds the lower-triangular seed factor of a Hermitian positive-definite
/// sample set.
///
/// The strict upper triangle of every returned node is exactly zero, the
/// diagonal entries are samples of outer functions, and
/// `Q(z_j)Q(z_j)ᴴ = S(z_j)` holds to roundoff at every node.
pub fn seed_factor(s: &GridSamples, cfg: &FactorConfig) -> Result<GridSamples> {
    let r = s.r();

    // Hermitian pre-check, relative to the data scale.
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    for (node, m) in s.nodes().iter().enumerate() {
        let residual = m.hermitian_residual();
        if residual > cfg.tol_herm * scale {
            return Err(Error::NotHermitian { node, residual });
        }
    }

    // Pointwise Cholesky, node-parallel. The pivot floor scales with the
    // local trace so a uniformly tiny but healthy density still factors.
    let chol: Vec<Mat> = s
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(node, m)| {
            let trace: f64 = (0..r).map(|i| m[(i, i)].re).sum();
            let floor = 1e-12 * trace / r as f64;
            cholesky_lower(m, floor).map_err(|pivot| Error::NotPositiveDefinite { node, pivot })
        })
        .collect::<Result<_>>()?;

    // Outer factor of each diagonal density, column-parallel.
    let diag_factors: Vec<Vec<Complex64>> = (0..r)
        .into_par_iter()
        .map(|m| {
            let density: Vec<f64> = chol.iter().map(|c| c[(m, m)].norm_sqr()).collect();
            crate::scalar::factorize_scalar(&density, m, cfg.pw_floor)
                .map(|f| f.samples().to_vec())
        })
        .collect::<Result<_>>()?;

    // Column scaling, node-parallel. Only rows at or below the diagonal
    // are written, so the strict upper triangle of each node is the exact
    // zero left by the constructor.
    let values: Vec<Mat> = chol
        .into_par_iter()
        .enumerate()
        .map(|(j, c)| {
            let mut q = Mat::zeros(r, r);
            for m in 0..r {
                let u = diag_factors[m][j] / c[(m, m)];
                for i in m..r {
                    q[(i, m)] = c[(i, m)] * u;
                }
            }
            q
        })
        .collect();

    Ok(GridSamples::from_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn cfg() -> FactorConfig {
        FactorConfig::default()
    }

    /// Deterministic Hermitian positive-definite samples: S = AAᴴ + I with
    /// A filled from smooth functions of the node angle.
    fn smooth_pd_samples(r: usize, n_g: usize) -> GridSamples {
        let values = (0..n_g)
            .map(|j| {
                let t = TAU * j as f64 / n_g as f64;
                let a = Mat::from_fn(r, r, |i, k| {
                    Complex64::new(
                        ((i + 1) as f64 * t).cos() * 0.3 + 0.1 * k as f64,
                        ((k + 2) as f64 * t).sin() * 0.2,
                    )
                });
                let mut s = a.mul_adjoint(&a);
                for i in 0..r {
                    s[(i, i)] += Complex64::new(1.0, 0.0);
                }
                s
            })
            .collect();
        GridSamples::from_values(values)
    }

    #[test]
    fn constant_two_by_two_matches_hand_computation() {
        // S = [[2,1],[1,2]] constant in z: the Cholesky factor is
        // [[√2,0],[1/√2,√(3/2)]], already outer-diagonal (real positive
        // constants), so the seed must reproduce it at every node.
        let s = Mat::from_real(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let samples = GridSamples::from_values(vec![s; 8]);
        let q = seed_factor(&samples, &cfg()).unwrap();
        for node in q.nodes() {
            assert!((node[(0, 0)] - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-14);
            assert!((node[(1, 0)] - Complex64::new(1.0 / 2f64.sqrt(), 0.0)).norm() < 1e-14);
            assert!((node[(1, 1)] - Complex64::new(1.5f64.sqrt(), 0.0)).norm() < 1e-14);
            assert_eq!(node[(0, 1)], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn reproduces_density_and_keeps_strict_upper_zero() {
        let samples = smooth_pd_samples(5, 64);
        let q = seed_factor(&samples, &cfg()).unwrap();
        let scale = samples.max_abs();
        for (node, (qj, sj)) in q.nodes().iter().zip(samples.nodes()).enumerate() {
            let prod = qj.mul_adjoint(qj);
            let err = prod.sub(sj).max_abs();
            assert!(err < 1e-12 * scale, "node {node}: QQᴴ residual {err:.3e}");
            for i in 0..5 {
                for k in (i + 1)..5 {
                    assert_eq!(qj[(i, k)], Complex64::new(0.0, 0.0), "entry ({i},{k})");
                }
            }
        }
    }

    #[test]
    fn diagonal_entries_are_outer_samples() {
        // Each diagonal entry, as a function on the grid, must have a
        // negligible anti-analytic half for a smooth well-conditioned
        // density.
        let samples = smooth_pd_samples(3, 256);
        let q = seed_factor(&samples, &cfg()).unwrap();
        for m in 0..3 {
            let mut d: Vec<Complex64> = q.nodes().iter().map(|n| n[(m, m)]).collect();
            crate::fft::analysis_inplace(&mut d);
            let anti: f64 = d[129..].iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(anti < 1e-10, "diagonal {m}: anti-analytic mass {anti:.3e}");
        }
    }

    #[test]
    fn rejects_non_hermitian_node() {
        let mut samples = smooth_pd_samples(3, 16);
        samples.node_mut(5)[(0, 1)] += Complex64::new(0.5, 0.0);
        match seed_factor(&samples, &cfg()) {
            Err(Error::NotHermitian { node: 5, .. }) => {}
            other => panic!("expected Hermitian failure at node 5, got {other:?}"),
        }
    }

    #[test]
    fn rejects_indefinite_node() {
        let mut samples = smooth_pd_samples(2, 16);
        *samples.node_mut(3) = Mat::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]);
        match seed_factor(&samples, &cfg()) {
            Err(Error::NotPositiveDefinite { node: 3, pivot: 1 }) => {}
            other => panic!("expected definiteness failure at node 3, got {other:?}"),
        }
    }

    #[test]
    fn tiny_but_healthy_density_still_factors() {
        // A uniformly scaled-down density must not trip the pivot floor,
        // which is relative to the local trace.
        let mut samples = smooth_pd_samples(4, 32);
        for node in samples.nodes_mut() {
            *node = node.scale(Complex64::new(1e-8, 0.0));
        }
        let q = seed_factor(&samples, &cfg()).unwrap();
        let scale = samples.max_abs();
        for (qj, sj) in q.nodes().iter().zip(samples.nodes()) {
            assert!(qj.mul_adjoint(qj).sub(sj).max_abs() < 1e-12 * scale);
        }
    }
}
