//! Shared machinery for the two factorization drivers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::mat::Mat;

/// Wall-clock breakdown of one driver run.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    /// Seconds spent building the pointwise-Cholesky seed factor.
    pub seed_seconds: f64,
    /// Seconds spent in the repair loop (all stages, or all levels).
    pub repair_seconds: f64,
    /// Seconds for the whole driver call.
    pub total_seconds: f64,
}

/// Diagnostics for one repair step (a stage of the triangular driver or
/// one superblock of one level of the doubling driver).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepInfo {
    /// Stage index (triangular driver) or level index (doubling driver).
    pub stage: usize,
    /// Superblock index within the level; always 0 for the triangular
    /// driver.
    pub superblock: usize,
    /// Truncation order `N` chosen by the tail rule.
    pub order: usize,
    /// Node-to-node deviation of the completion's Gram matrix.
    pub gram_deviation: f64,
    /// Node-to-node deviation of the completion's determinant.
    pub det_deviation: f64,
    /// Largest entry of `U Uᴴ − I` for the step's multiplier; measured only
    /// when product checks are enabled.
    pub unitary_residual: Option<f64>,
    /// Largest entry of `Q Qᴴ − S` after the step (level-wide for the
    /// doubling driver); measured only when product checks are enabled.
    pub product_drift: Option<f64>,
}

/// Truncation order for a coefficient window: the smallest `N ≤ cap` such
/// that every anti-analytic coefficient beyond it, `|c_{−t}|` with
/// `t > N`, falls below `eps` times the window's largest coefficient
/// magnitude. Returns `cap` when even the deepest tail coefficient is
/// significant, and 0 for a window with no significant anti content.
pub(crate) fn tail_order(table: &[Mat], eps: f64, cap: usize) -> usize {
    let n_g = table.len();
    let gmax = table.iter().map(Mat::max_abs).fold(0.0f64, f64::max);
    if gmax == 0.0 {
        return 0;
    }
    let threshold = eps * gmax;
    let mut ok_from = cap + 1;
    for t in (1..=cap).rev() {
        if table[n_g - t].max_abs() < threshold {
            ok_from = t;
        } else {
            break;
        }
    }
    (ok_from - 1).min(cap)
}

/// Multiplies columns `col_start..col_start+k` of `q` (rows `row_start`
/// and below) in place by the `k×k` multiplier given as its transpose
/// `u_t` — the transposed layout makes both factors of the inner product
/// contiguous in memory.
pub(crate) fn apply_multiplier(q: &mut Mat, row_start: usize, col_start: usize, u_t: &Mat) {
    let k = u_t.rows();
    let rows = q.rows();
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for i in row_start..rows {
        {
            let row = q.row(i);
            for (c, out) in buf.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, b) in row[col_start..col_start + k].iter().zip(u_t.row(c)) {
                    acc += a * b;
                }
                *out = acc;
            }
        }
        for (c, v) in buf.iter().enumerate() {
            q[(i, col_start + c)] = *v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_table(anti_mags: &[f64], n_g: usize) -> Vec<Mat> {
        // Builds a coefficient table with |c₀| = 1 and the given moduli at
        // powers −1, −2, … .
        let mut t = vec![Mat::zeros(1, 1); n_g];
        t[0][(0, 0)] = Complex64::new(1.0, 0.0);
        for (i, &m) in anti_mags.iter().enumerate() {
            t[n_g - 1 - i][(0, 0)] = Complex64::new(m, 0.0);
        }
        t
    }

    #[test]
    fn tail_order_cuts_geometric_tail_at_threshold() {
        // Moduli 2^{−t} for t = 1..: with eps = 1e−6 the deepest index still
        // above threshold is t = 19 (2⁻¹⁹ ≈ 1.9e−6), so the order is 19.
        let mags: Vec<f64> = (1..=32).map(|t| (2.0f64).powi(-t)).collect();
        let table = scalar_table(&mags, 128);
        assert_eq!(tail_order(&table, 1e-6, 64), 19);
        // A generous threshold keeps almost nothing; a strict one keeps
        // the entire populated tail (t = 1..32).
        assert_eq!(tail_order(&table, 0.6, 64), 0);
        assert_eq!(tail_order(&table, 1e-12, 64), 32);
    }

    #[test]
    fn tail_order_saturates_at_cap() {
        let mags = vec![0.5; 64];
        let table = scalar_table(&mags, 128);
        assert_eq!(tail_order(&table, 1e-6, 64), 64);
        assert_eq!(tail_order(&table, 1e-6, 16), 16);
    }

    #[test]
    fn tail_order_of_zero_window_is_zero() {
        let table = vec![Mat::zeros(2, 2); 64];
        assert_eq!(tail_order(&table, 1e-14, 32), 0);
    }

    #[test]
    fn apply_multiplier_matches_block_product() {
        let q0 = Mat::from_fn(5, 5, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 2.0));
        let u = Mat::from_fn(3, 3, |i, j| Complex64::new(0.3 * i as f64, 1.0 - j as f64));
        let mut q = q0.clone();
        apply_multiplier(&mut q, 1, 2, &u.transpose());
        let expect = q0.block(1, 2, 4, 3).mul(&u);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i >= 1 && j >= 2 { expect[(i - 1, j - 2)] } else { q0[(i, j)] };
                assert!((q[(i, j)] - want).norm() < 1e-13, "entry ({i},{j})");
            }
        }
    }
}
