//! Spectral factorization of scalar densities on the unit-circle grid.
//!
//! A positive density `s` sampled on the grid factors as `s = |s₊|²` where
//! `s₊` extends to a zero-free analytic function on the unit disk (an outer
//! function). The factor is computed through the logarithm: writing
//! `log s = Σ cₙ zⁿ` (with `c₋ₙ = c̄ₙ` since `s` is real), the analytic half
//!
//! ```text
//! a(z) = c₀/2 + Σ_{0<k<N_g/2} c_k z^k + (c_{N_g/2}/2) z^{N_g/2}
//! ```
//!
//! gives `s₊ = exp(a)`. Splitting the real Nyquist coefficient evenly
//! between the analytic half and its mirror keeps `|s₊(z_j)|² = s(z_j)`
//! exact on the grid: `a(z_j) + conj(a(z_j))` reproduces every grid sample
//! of `log s`, including the fold at the Nyquist frequency.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Outer factor of a scalar density, sampled on the same grid as its input.
#[derive(Debug, Clone)]
pub struct ScalarFactor {
    samples: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl ScalarFactor {
    /// Grid samples `s₊(z_j)`, `j = 0..N_g`.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// First `N_g/2` analytic coefficients of the factor (power `k` at
    /// index `k`).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Number of grid nodes.
    pub fn n_g(&self) -> usize {
        self.samples.len()
    }
}

/// Computes the outer factor of a positive density given by its grid
/// samples.
///
/// `diag` only labels errors: matrix pipelines factor one scalar density
/// per diagonal entry, and a failure report names the entry. `pw_floor`
/// bounds the grid mean of `log s` from below; a mean below the floor
/// means the density is numerically indistinguishable from one vanishing
/// on part of the circle, for which no meaningful factor exists.
///
/// The returned factor satisfies `|s₊(z_j)|² = s(z_j)` to roundoff at
/// every grid node and is normalized so `s₊` of the zero frequency,
/// `exp(c₀/2)`, is real positive.
pub fn factorize_scalar(samples: &[f64], diag: usize, pw_floor: f64) -> Result<ScalarFactor> {
    let n_g = samples.len();
    assert!(
        n_g >= 2 && n_g.is_power_of_two(),
        "grid size must be a power of two ≥ 2, got {n_g}"
    );

    let mut log_s = Vec::with_capacity(n_g);
    let mut mean_log = 0.0;
    for (node, &value) in samples.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveSample { node, value });
        }
        let l = value.ln();
        mean_log += l;
        log_s.push(Complex64::new(l, 0.0));
    }
    mean_log /= n_g as f64;
    if mean_log < pw_floor {
        return Err(Error::PaleyWienerFail { diag, mean_log, floor: pw_floor });
    }

    // Cepstrum: coefficients of log s on the grid.
    fft::analysis_inplace(&mut log_s);
    let cep = log_s;

    // Analytic half with the constant and Nyquist terms split evenly.
    let half = n_g / 2;
    let mut a = vec![Complex64::new(0.0, 0.0); n_g];
    a[0] = 0.5 * cep[0];
    a[1..half].copy_from_slice(&cep[1..half]);
    a[half] = 0.5 * cep[half];
    fft::synthesis_inplace(&mut a);

    let mut factor = a;
    for (node, value) in factor.iter_mut().enumerate() {
        *value = value.exp();
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::OverflowInExp { node });
        }
    }

    let mut coeffs = factor.clone();
    fft::analysis_inplace(&mut coeffs);
    coeffs.truncate(half);

    Ok(ScalarFactor { samples: factor, coeffs })
}
