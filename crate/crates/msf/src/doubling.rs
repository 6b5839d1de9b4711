//! Block-doubling factorization driver.
//!
//! Where the triangular driver repairs one row per step, this driver
//! merges already-analytic diagonal blocks pairwise: after level `ℓ` the
//! factor is block lower triangular with analytic diagonal blocks of size
//! `2^ℓ`, so `log₂ r` levels finish the job. Each level splits the matrix
//! into superblocks of size `2M` (`M = 2^{ℓ−1}`); within a superblock the
//! lower-left `M×M` block's anti-analytic coefficients form the defect,
//! the lower-right diagonal block plays the role of `f`, and a single
//! paraunitary completion with two block columns repairs both at once.
//! Superblocks of one level touch disjoint column ranges and are processed
//! in parallel; the node-wise updates that follow parallelize over grid
//! nodes.
//!
//! Matrix orders that are not powers of two are padded with an identity
//! block. The padding stays bitwise identity through every level — padded
//! rows of each defect window are exactly zero, so the completions act as
//! the identity there — and the final factor is the leading `r×r` block.

use std::time::Instant;

use rayon::prelude::*;

use crate::completion::{complete, Completion};
use crate::config::FactorConfig;
use crate::driver::{apply_multiplier, tail_order, PhaseTimings, StepInfo};
use crate::error::{Error, Result};
use crate::laurent::{window_coefficients, GridSamples};
use crate::mat::Mat;
use crate::seed::seed_factor;

/// Output of the doubling driver: the analytic factor on the grid plus
/// per-superblock diagnostics.
#[derive(Debug, Clone)]
pub struct DoublingRun {
    /// The spectral factor `S₊` sampled on the grid.
    pub factor: GridSamples,
    /// One entry per superblock that performed a repair; `stage` holds the
    /// level index.
    pub steps: Vec<StepInfo>,
    /// Wall-clock split of the run.
    pub timings: PhaseTimings,
}

/// Factorizes `s` with the block-doubling algorithm.
///
/// Accepts the same input as [`crate::classic_factorize`] and produces a
/// factor of the same density; the two factors agree up to a constant
/// unitary right factor.
pub fn doubling_factorize(s: &GridSamples, cfg: &FactorConfig) -> Result<DoublingRun> {
    cfg.validate()?;
    let started = Instant::now();
    let r = s.r();
    let n_g = s.n_g();
    let cap = n_g / 2;
    let rp = r.next_power_of_two();
    let padded = pad_with_identity(s, rp);
    let mut q = seed_factor(&padded, cfg)?;
    let seed_seconds = started.elapsed().as_secs_f64();
    let p = rp.trailing_zeros() as usize;
    let mut steps = Vec::new();

    for level in 1..=p {
        let m_blk = 1usize << (level - 1);
        let k_count = 1usize << (p - level);

        let completions: Vec<Option<(usize, usize, Completion)>> = (0..k_count)
            .into_par_iter()
            .map(|k| superblock_completion(&q, level, k, m_blk, cap, cfg))
            .collect::<Result<Vec<_>>>()?;

        let level_first_step = steps.len();
        for (k, order, completion) in completions.iter().flatten() {
            steps.push(StepInfo {
                stage: level,
                superblock: *k,
                order: *order,
                gram_deviation: completion.gram_deviation(),
                det_deviation: completion.det_deviation(),
                unitary_residual: completion.unitary_residual(),
                product_drift: None,
            });
        }

        q.nodes_mut().par_iter_mut().enumerate().for_each(|(j, qn)| {
            for (k, _, completion) in completions.iter().flatten() {
                let top = 2 * m_blk * k;
                let u_t = completion.samples().node(j).transpose();
                apply_multiplier(qn, top, top, &u_t);
            }
        });

        if cfg.check_products {
            let drift = verify_level(&q, &padded, r, m_blk).map_err(|e| e.at_level(level, 0))?;
            for step in &mut steps[level_first_step..] {
                step.product_drift = Some(drift);
            }
        }
    }

    let factor = trim(&q, r);
    let total_seconds = started.elapsed().as_secs_f64();
    let timings = PhaseTimings {
        seed_seconds,
        repair_seconds: total_seconds - seed_seconds,
        total_seconds,
    };
    Ok(DoublingRun { factor, steps, timings })
}

/// Builds the completion for superblock `k` of a level, or `None` when the
/// defect window is identically zero (typical for identity padding).
fn superblock_completion(
    q: &GridSamples,
    level: usize,
    k: usize,
    m_blk: usize,
    cap: usize,
    cfg: &FactorConfig,
) -> Result<Option<(usize, usize, Completion)>> {
    let n_g = q.n_g();
    let top = 2 * m_blk * k;
    let mid = top + m_blk;

    let zc = window_coefficients(q.nodes(), mid, top, m_blk, m_blk);
    let mut order = tail_order(&zc, cfg.eps_tail, cap);
    if order == 0 {
        let window_max = zc.iter().map(Mat::max_abs).fold(0.0f64, f64::max);
        if window_max == 0.0 {
            return Ok(None);
        }
        order = 1;
    }

    let zeta: Vec<Mat> = (0..=order)
        .map(|t| if t == 0 { Mat::zeros(m_blk, m_blk) } else { zc[n_g - t].clone() })
        .collect();
    let fc = window_coefficients(q.nodes(), mid, mid, m_blk, m_blk);
    let f: Vec<Mat> = fc[..=order].to_vec();

    let completion = complete(&[zeta], &f, n_g, cfg).map_err(|e| e.at_level(level, k))?;
    Ok(Some((k, order, completion)))
}

/// Check-mode invariants after a level with half-block size `m_blk`: the
/// region above the superblock diagonal is bitwise zero, identity padding
/// is bitwise untouched, and `QQᴴ` still reproduces the padded input to
/// near machine precision. Analytic quality is not gated here — see the
/// note on `verify_stage` in the triangular driver. Returns the measured
/// product drift.
fn verify_level(q: &GridSamples, padded: &GridSamples, r: usize, m_blk: usize) -> Result<f64> {
    let rp = q.r();
    let width = 2 * m_blk;

    for qn in q.nodes() {
        for k in 0..rp / width {
            let top = width * k;
            for i in 0..top {
                for j in top..top + width {
                    assert_eq!(
                        qn[(i, j)],
                        num_complex::Complex64::new(0.0, 0.0),
                        "fill above superblock {k}"
                    );
                }
            }
        }
        for i in 0..rp {
            for j in 0..rp {
                if i >= r || j >= r {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_eq!(
                        qn[(i, j)],
                        num_complex::Complex64::new(expect, 0.0),
                        "identity padding disturbed at ({i},{j})"
                    );
                }
            }
        }
    }

    let scale_s = padded.max_abs();
    let drift = q
        .nodes()
        .par_iter()
        .zip(padded.nodes().par_iter())
        .map(|(qn, sn)| qn.mul_adjoint(qn).sub(sn).max_abs())
        .reduce(|| 0.0f64, f64::max);
    let tol_drift = 1e-11 * scale_s.max(1.0);
    if drift > tol_drift {
        return Err(Error::ProductDrift { residual: drift, tolerance: tol_drift });
    }
    Ok(drift)
}

/// Extends samples to order `rp` by placing an identity block in the new
/// rows and columns. Returns a plain clone when no padding is needed.
fn pad_with_identity(s: &GridSamples, rp: usize) -> GridSamples {
    let r = s.r();
    if rp == r {
        return s.clone();
    }
    let values: Vec<Mat> = s
        .nodes()
        .iter()
        .map(|node| {
            let mut m = Mat::identity(rp);
            m.set_block(0, 0, node);
            m
        })
        .collect();
    GridSamples::from_values(values)
}

/// Restricts samples to the leading `r×r` block at every node.
fn trim(q: &GridSamples, r: usize) -> GridSamples {
    if q.r() == r {
        return q.clone();
    }
    let values: Vec<Mat> = q.nodes().iter().map(|node| node.block(0, 0, r, r)).collect();
    GridSamples::from_values(values)
}
