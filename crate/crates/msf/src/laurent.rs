//! Laurent matrix polynomials and their grid-sample dual.
//!
//! A `LaurentPoly` is a finite series P(z) = Σₙ Aₙ zⁿ, n = −n₁..n₂, with
//! square complex matrix coefficients. A `GridSamples` holds the values of a
//! matrix function at the uniform unit-circle grid z_j = e^{2πij/N_g}. The
//! two are linked by the crate-wide transform convention (see [`crate::fft`]):
//! coefficients live at transform index n for powers n ≥ 0 and at index
//! N_g − k for powers −k < 0.
//!
//! Coefficients are the source of truth; grid samples are the cheap place to
//! multiply and invert. Products route through the grid at a sufficient
//! resolution, so they are exact up to rounding.

use num_complex::Complex64;

use crate::fft;
use crate::mat::Mat;

/// Finite Laurent series with square matrix coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    r: usize,
    n_neg: usize,
    n_pos: usize,
    /// Coefficient of power n at index n + n_neg.
    coeffs: Vec<Mat>,
}

impl LaurentPoly {
    /// Zero polynomial with the given band.
    pub fn zeros(r: usize, n_neg: usize, n_pos: usize) -> Self {
        let coeffs = (0..n_neg + n_pos + 1).map(|_| Mat::zeros(r, r)).collect();
        LaurentPoly { r, n_neg, n_pos, coeffs }
    }

    /// The constant polynomial I_r.
    pub fn identity(r: usize) -> Self {
        LaurentPoly { r, n_neg: 0, n_pos: 0, coeffs: vec![Mat::identity(r)] }
    }

    /// Builds from a list of (power, coefficient) pairs; repeated powers add.
    pub fn from_terms(r: usize, terms: &[(i64, Mat)]) -> Self {
        let n_neg = terms.iter().map(|(n, _)| (-n).max(0) as usize).max().unwrap_or(0);
        let n_pos = terms.iter().map(|(n, _)| (*n).max(0) as usize).max().unwrap_or(0);
        let mut p = LaurentPoly::zeros(r, n_neg, n_pos);
        for (n, a) in terms {
            assert_eq!(a.rows(), r);
            assert_eq!(a.cols(), r);
            let idx = (n + n_neg as i64) as usize;
            p.coeffs[idx] = p.coeffs[idx].add(a);
        }
        p
    }

    /// Builds from contiguous coefficients for powers −n_neg..=n_pos.
    pub fn from_coeffs(r: usize, n_neg: usize, n_pos: usize, coeffs: Vec<Mat>) -> Self {
        assert_eq!(coeffs.len(), n_neg + n_pos + 1);
        for c in &coeffs {
            assert_eq!((c.rows(), c.cols()), (r, r));
        }
        LaurentPoly { r, n_neg, n_pos, coeffs }
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn n_neg(&self) -> usize {
        self.n_neg
    }

    #[inline]
    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    /// Coefficient of power `n`; zero matrix reference semantics are not
    /// provided — powers outside the band return `None`.
    pub fn coeff(&self, n: i64) -> Option<&Mat> {
        if n < -(self.n_neg as i64) || n > self.n_pos as i64 {
            None
        } else {
            Some(&self.coeffs[(n + self.n_neg as i64) as usize])
        }
    }

    /// Mutable coefficient of power `n` (must lie inside the band).
    pub fn coeff_mut(&mut self, n: i64) -> &mut Mat {
        assert!(n >= -(self.n_neg as i64) && n <= self.n_pos as i64, "power outside band");
        &mut self.coeffs[(n + self.n_neg as i64) as usize]
    }

    /// All coefficients in power order −n_neg..=n_pos.
    pub fn coeffs(&self) -> &[Mat] {
        &self.coeffs
    }

    /// Largest entry modulus over all coefficients.
    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    /// All strictly negative powers are zero.
    pub fn is_analytic(&self) -> bool {
        self.coeffs[..self.n_neg].iter().all(|c| c.max_abs() == 0.0)
    }

    /// All strictly positive powers are zero.
    pub fn is_antianalytic(&self) -> bool {
        self.coeffs[self.n_neg + 1..].iter().all(|c| c.max_abs() == 0.0)
    }

    /// Adjoint P̃: coefficient of power n becomes A₋ₙᴴ, so that on the unit
    /// circle P̃(z) = P(z)ᴴ pointwise.
    pub fn adjoint(&self) -> LaurentPoly {
        let coeffs = self.coeffs.iter().rev().map(|c| c.adjoint()).collect();
        LaurentPoly { r: self.r, n_neg: self.n_pos, n_pos: self.n_neg, coeffs }
    }

    /// Keeps powers n ≥ 0 (band shrinks to [0, n_pos]).
    pub fn project_plus(&self) -> LaurentPoly {
        LaurentPoly {
            r: self.r,
            n_neg: 0,
            n_pos: self.n_pos,
            coeffs: self.coeffs[self.n_neg..].to_vec(),
        }
    }

    /// Keeps powers n ≤ 0 (band shrinks to [−n_neg, 0]).
    pub fn project_minus(&self) -> LaurentPoly {
        LaurentPoly {
            r: self.r,
            n_neg: self.n_neg,
            n_pos: 0,
            coeffs: self.coeffs[..self.n_neg + 1].to_vec(),
        }
    }

    /// Evaluates on the N_g-point grid. Requires N_g ≥ n_neg + n_pos + 1 so
    /// no two band powers share a transform index.
    pub fn to_grid(&self, n_g: usize) -> GridSamples {
        assert!(
            n_g >= self.n_neg + self.n_pos + 1,
            "grid size {} too small for band ({}, {})",
            n_g,
            self.n_neg,
            self.n_pos
        );
        let r = self.r;
        let mut values = vec![Mat::zeros(r, r); n_g];
        let mut buf = vec![Complex64::ZERO; n_g];
        for i in 0..r {
            for j in 0..r {
                buf.fill(Complex64::ZERO);
                for (t, c) in self.coeffs.iter().enumerate() {
                    let n = t as i64 - self.n_neg as i64;
                    let idx = n.rem_euclid(n_g as i64) as usize;
                    buf[idx] = c[(i, j)];
                }
                fft::synthesis_inplace(&mut buf);
                for (v, b) in values.iter_mut().zip(&buf) {
                    v[(i, j)] = *b;
                }
            }
        }
        GridSamples { r, values }
    }

    /// Product via pointwise grid multiplication at exact resolution. The
    /// output band is the sum of the operand bands (Cauchy product).
    pub fn multiply(&self, rhs: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.r, rhs.r, "dimension mismatch in multiply");
        let n_neg = self.n_neg + rhs.n_neg;
        let n_pos = self.n_pos + rhs.n_pos;
        let n_g = (n_neg + n_pos + 1).next_power_of_two().max(2);
        let a = self.to_grid(n_g);
        let b = rhs.to_grid(n_g);
        let prod = a.mul_pointwise(&b);
        prod.to_poly(n_neg, n_pos)
    }

    /// Paraunitarity residual max_j |U(z_j)U(z_j)ᴴ − I|_∞ on a grid fine
    /// enough (2·band+1 points) that the check is exact for the polynomial.
    pub fn paraunitary_residual(&self) -> f64 {
        let band = self.n_neg + self.n_pos;
        let n_g = (2 * band + 1).next_power_of_two().max(2);
        let g = self.to_grid(n_g);
        let eye = Mat::identity(self.r);
        g.values.iter().fold(0.0, |m, u| m.max(u.mul_adjoint(u).sub(&eye).max_abs()))
    }

    /// True when the paraunitarity residual is at most `tol`.
    pub fn is_paraunitary(&self, tol: f64) -> bool {
        self.paraunitary_residual() <= tol
    }
}

/// Values of a matrix function on the uniform unit-circle grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSamples {
    r: usize,
    values: Vec<Mat>,
}

impl GridSamples {
    /// Constant identity function on an N_g-point grid.
    pub fn identity(r: usize, n_g: usize) -> Self {
        GridSamples { r, values: vec![Mat::identity(r); n_g] }
    }

    /// Wraps existing per-node values (all r×r, length a power of two ≥ 2).
    pub fn from_values(values: Vec<Mat>) -> Self {
        assert!(values.len() >= 2 && values.len().is_power_of_two(), "grid size must be a power of two ≥ 2");
        let r = values[0].rows();
        for v in &values {
            assert_eq!((v.rows(), v.cols()), (r, r));
        }
        GridSamples { r, values }
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn n_g(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn node(&self, j: usize) -> &Mat {
        &self.values[j]
    }

    #[inline]
    pub fn node_mut(&mut self, j: usize) -> &mut Mat {
        &mut self.values[j]
    }

    #[inline]
    pub fn nodes(&self) -> &[Mat] {
        &self.values
    }

    #[inline]
    pub fn nodes_mut(&mut self) -> &mut [Mat] {
        &mut self.values
    }

    /// Pointwise product.
    pub fn mul_pointwise(&self, rhs: &GridSamples) -> GridSamples {
        assert_eq!(self.r, rhs.r);
        assert_eq!(self.n_g(), rhs.n_g());
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a.mul(b)).collect();
        GridSamples { r: self.r, values }
    }

    /// Pointwise A(z_j)·B(z_j)ᴴ.
    pub fn mul_adjoint_pointwise(&self, rhs: &GridSamples) -> GridSamples {
        assert_eq!(self.r, rhs.r);
        assert_eq!(self.n_g(), rhs.n_g());
        let values =
            self.values.iter().zip(&rhs.values).map(|(a, b)| a.mul_adjoint(b)).collect();
        GridSamples { r: self.r, values }
    }

    /// Largest entry modulus over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }

    /// Largest Hermitian residual over all nodes.
    pub fn hermitian_residual(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.hermitian_residual()))
    }

    /// Largest pointwise deviation from unitarity:
    /// `max_j ‖A(z_j)A(z_j)ᴴ − I‖_max`.
    pub fn unitary_residual(&self) -> f64 {
        let eye = Mat::identity(self.r);
        self.values
            .iter()
            .map(|a| a.mul_adjoint(a).sub(&eye).max_abs())
            .fold(0.0f64, f64::max)
    }

    /// Recovers the coefficient band (−n_neg..n_pos). Exact (up to rounding)
    /// when the sampled function's true band fits; otherwise higher powers
    /// alias into the requested ones.
    pub fn to_poly(&self, n_neg: usize, n_pos: usize) -> LaurentPoly {
        let n_g = self.n_g();
        assert!(n_neg + n_pos + 1 <= n_g, "band too wide for grid");
        let table = self.coefficient_table();
        let mut coeffs = Vec::with_capacity(n_neg + n_pos + 1);
        for n in -(n_neg as i64)..=(n_pos as i64) {
            let idx = n.rem_euclid(n_g as i64) as usize;
            coeffs.push(table[idx].clone());
        }
        LaurentPoly { r: self.r, n_neg, n_pos, coeffs }
    }

    /// Full table of N_g Fourier coefficients in transform-index order
    /// (index n ↔ power n for n ≤ N_g/2, power n − N_g above).
    pub fn coefficient_table(&self) -> Vec<Mat> {
        window_coefficients(&self.values, 0, 0, self.r, self.r)
    }
}

/// Fourier coefficients of a rectangular window of per-node matrices:
/// entry (i, j) of result[t] is the t-th transform coefficient of the scalar
/// function node ↦ values[node][(r0+i, c0+j)]. Transform-index order.
pub(crate) fn window_coefficients(
    values: &[Mat],
    r0: usize,
    c0: usize,
    nr: usize,
    nc: usize,
) -> Vec<Mat> {
    let n_g = values.len();
    let mut out = vec![Mat::zeros(nr, nc); n_g];
    let mut buf = vec![Complex64::ZERO; n_g];
    for i in 0..nr {
        for j in 0..nc {
            for (b, v) in buf.iter_mut().zip(values) {
                *b = v[(r0 + i, c0 + j)];
            }
            fft::analysis_inplace(&mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                o[(i, j)] = *b;
            }
        }
    }
    out
}

/// Inverse of [`window_coefficients`]: synthesizes per-node matrices from a
/// full transform-index-ordered coefficient table.
pub(crate) fn window_values(coeffs: &[Mat]) -> Vec<Mat> {
    let n_g = coeffs.len();
    let (nr, nc) = (coeffs[0].rows(), coeffs[0].cols());
    let mut out = vec![Mat::zeros(nr, nc); n_g];
    let mut buf = vec![Complex64::ZERO; n_g];
    for i in 0..nr {
        for j in 0..nc {
            for (b, c) in buf.iter_mut().zip(coeffs) {
                *b = c[(i, j)];
            }
            fft::synthesis_inplace(&mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                o[(i, j)] = *b;
            }
        }
    }
    out
}
