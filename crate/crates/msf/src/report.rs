//! Machine-readable run reports.
//!
//! A [`FactorReport`] records what a factorization (or a standalone
//! verification) did: the accuracy metrics of the produced factor, the
//! numerical policy it ran under, per-step completion diagnostics, and the
//! wall-clock phase split. Reports serialize to human-readable JSON so
//! batch runs can be diffed, archived, and plotted by external tools.

use serde::{Deserialize, Serialize};

use crate::bench::Algorithm;
use crate::config::FactorConfig;
use crate::density::GeneratorConfig;
use crate::driver::{PhaseTimings, StepInfo};
use crate::error::{Error, Result};
use crate::laurent::GridSamples;
use crate::metrics::{anti_leakage, factor_residual, outer_defect};

/// Accuracy metrics of one factor against one density.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReportMetrics {
    /// `C₁ = max_j ‖S(z_j) − S₊(z_j)S₊ᴴ(z_j)‖_∞` — reconstruction error.
    pub c1: f64,
    /// `C₂` — largest coefficient magnitude of `S₊` at negative powers;
    /// near zero certifies the factor is (approximately) causal.
    pub c2: f64,
    /// Discrete outerness gap of `det S₊`: `|log|det S₊(0)|` minus the grid
    /// mean of `log|det S₊(z_j)|`; absent when the determinant vanishes at
    /// a node.
    pub outer_gap: Option<f64>,
}

/// Full record of a factorization or verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorReport {
    /// Library version that produced the report.
    pub version: String,
    /// `"classic"`, `"doubling"`, or `"verify"` for a metrics-only run.
    pub algorithm: String,
    /// Matrix dimension.
    pub r: usize,
    /// Grid size.
    pub n_g: usize,
    /// Numerical policy of the run; absent for metrics-only verification.
    pub config: Option<FactorConfig>,
    /// Echo of the generator parameters when the density was generated
    /// rather than read from a file.
    pub generator: Option<GeneratorConfig>,
    /// Accuracy metrics; absent when the run failed before producing a
    /// factor.
    pub metrics: Option<ReportMetrics>,
    /// Wall-clock phase split (zeros for metrics-only verification).
    pub timings: PhaseTimings,
    /// Per-completion diagnostics: truncation order, Gram/determinant
    /// deviations, and — when product checks were enabled — the measured
    /// paraunitarity residual of each applied multiplier.
    pub steps: Vec<StepInfo>,
    /// Human-readable failure description (the failing stage, level, or
    /// superblock included) when the run aborted.
    pub failure: Option<String>,
}

/// Computes the three accuracy metrics of `factor` against `density`.
///
/// The outerness gap degrades to `None` instead of failing the whole
/// report when the factor's determinant vanishes at a grid node.
pub fn measure(density: &GridSamples, factor: &GridSamples) -> Result<ReportMetrics> {
    if density.r() != factor.r() || density.n_g() != factor.n_g() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}×{} on {} nodes", density.r(), density.r(), density.n_g()),
            got: format!("{}×{} on {} nodes", factor.r(), factor.r(), factor.n_g()),
        });
    }
    Ok(ReportMetrics {
        c1: factor_residual(density, factor),
        c2: anti_leakage(factor),
        outer_gap: outer_defect(factor).ok(),
    })
}

impl FactorReport {
    /// Report for a completed driver run.
    pub fn for_run(
        algorithm: Algorithm,
        density: &GridSamples,
        factor: &GridSamples,
        steps: &[StepInfo],
        timings: PhaseTimings,
        config: &FactorConfig,
    ) -> Result<FactorReport> {
        Ok(FactorReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            algorithm: algorithm.name().to_string(),
            r: factor.r(),
            n_g: factor.n_g(),
            config: Some(*config),
            generator: None,
            metrics: Some(measure(density, factor)?),
            timings,
            steps: steps.to_vec(),
            failure: None,
        })
    }

    /// Metrics-only report for an existing factor (no factorization ran).
    pub fn for_verification(density: &GridSamples, factor: &GridSamples) -> Result<FactorReport> {
        Ok(FactorReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            algorithm: "verify".to_string(),
            r: factor.r(),
            n_g: factor.n_g(),
            config: None,
            generator: None,
            metrics: Some(measure(density, factor)?),
            timings: PhaseTimings::default(),
            steps: Vec::new(),
            failure: None,
        })
    }

    /// Report for a run that aborted with a numerical failure.
    pub fn for_failure(
        algorithm: Algorithm,
        r: usize,
        n_g: usize,
        config: &FactorConfig,
        error: &Error,
    ) -> FactorReport {
        FactorReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            algorithm: algorithm.name().to_string(),
            r,
            n_g,
            config: Some(*config),
            generator: None,
            metrics: None,
            timings: PhaseTimings::default(),
            steps: Vec::new(),
            failure: Some(error.to_string()),
        }
    }

    /// Every recorded residual and metric is finite and non-negative.
    pub fn residuals_are_sane(&self) -> bool {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        let metrics_ok = self.metrics.as_ref().map_or(true, |m| {
            ok(m.c1) && ok(m.c2) && m.outer_gap.map_or(true, |g| g.is_finite())
        });
        let steps_ok = self.steps.iter().all(|s| {
            ok(s.gram_deviation)
                && ok(s.det_deviation)
                && s.unitary_residual.map_or(true, ok)
                && s.product_drift.map_or(true, ok)
        });
        metrics_ok && steps_ok
    }

    /// Pretty-printed JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Parses a report produced by [`FactorReport::to_json`].
    pub fn from_json(text: &str) -> Result<FactorReport> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig {
            message: format!("malformed report JSON: {e}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::classic_factorize;
    use crate::density::generate_density;

    #[test]
    fn identity_factor_reports_zero_metrics() {
        let s = GridSamples::identity(3, 16);
        let m = measure(&s, &s).unwrap();
        assert_eq!(m.c1, 0.0);
        assert!(m.c2 < 1e-14);
        assert!(m.outer_gap.unwrap().abs() < 1e-14);
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let s = GridSamples::identity(3, 16);
        let f = GridSamples::identity(2, 16);
        assert!(matches!(measure(&s, &f), Err(Error::DimensionMismatch { .. })));
        let g = GridSamples::identity(3, 32);
        assert!(measure(&s, &g).is_err());
    }

    #[test]
    fn run_report_round_trips_through_json() {
        let cfg = FactorConfig { check_products: true, ..FactorConfig::default() };
        let gen = GeneratorConfig::new(3, 1, 64, 4);
        let s = generate_density(&gen).unwrap().to_grid(64);
        let run = classic_factorize(&s, &cfg).unwrap();
        let mut report = FactorReport::for_run(
            Algorithm::Classic,
            &s,
            &run.factor,
            &run.steps,
            run.timings,
            &cfg,
        )
        .unwrap();
        report.generator = Some(gen);
        assert!(report.residuals_are_sane());
        assert_eq!(report.algorithm, "classic");
        assert!(report.metrics.unwrap().c1 < 1e-11);
        assert!(!report.steps.is_empty());
        assert!(report.steps.iter().all(|st| st.unitary_residual.is_some()));

        let text = report.to_json();
        let back = FactorReport::from_json(&text).unwrap();
        assert_eq!(back.algorithm, report.algorithm);
        assert_eq!(back.steps.len(), report.steps.len());
        assert_eq!(back.generator.unwrap(), gen);
        assert!(back.residuals_are_sane());
    }

    #[test]
    fn failure_report_names_the_stage() {
        let cfg = FactorConfig::default();
        let err = Error::SingularMatrix.at_stage(5);
        let report = FactorReport::for_failure(Algorithm::Classic, 8, 64, &cfg, &err);
        assert!(report.metrics.is_none());
        assert!(report.failure.as_ref().unwrap().contains("stage 5"));
        assert!(report.residuals_are_sane());
        let back = FactorReport::from_json(&report.to_json()).unwrap();
        assert!(back.failure.unwrap().contains("stage 5"));
    }

    #[test]
    fn malformed_json_is_a_config_error() {
        let err = FactorReport::from_json("{not json").unwrap_err();
        assert!(err.is_config_error());
    }
}
