//! Side-by-side timing of the two drivers on shared densities.
//!
//! The harness generates one density per row, feeds the *identical* sample
//! buffer to both algorithms strictly serially (never concurrently, so the
//! two timings never contend for cores), and reports wall times, the
//! accuracy metrics of each factor, and the classic/doubling time ratio.
//! A bitwise checksum of the input buffer is asserted before and after
//! every run: the drivers take the samples by shared reference, and the
//! checksum turns that compile-time promise into a measured one.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classic::classic_factorize;
use crate::config::FactorConfig;
use crate::density::{generate_density, GeneratorConfig};
use crate::doubling::doubling_factorize;
use crate::driver::PhaseTimings;
use crate::error::{Error, Result};
use crate::laurent::GridSamples;
use crate::metrics::{anti_leakage, factor_residual};

/// Which driver(s) a benchmark run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Row-by-row triangular elimination.
    Classic,
    /// Block-doubling repair.
    Doubling,
}

impl Algorithm {
    /// Stable lower-case name used in reports and CLI flags.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Classic => "classic",
            Algorithm::Doubling => "doubling",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classic" => Ok(Algorithm::Classic),
            "doubling" => Ok(Algorithm::Doubling),
            other => Err(Error::InvalidConfig {
                message: format!("unknown algorithm {other:?}; expected classic or doubling"),
            }),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One benchmark case: a generated density plus the run policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSpec {
    /// Density to generate and factor.
    pub generator: GeneratorConfig,
    /// Numerical policy for both drivers (product checks should stay off;
    /// they are O(run) extra work and would distort the timings).
    pub factor: FactorConfig,
    /// Untimed runs per algorithm before the timed ones (warms caches and
    /// transform plans).
    pub warmup: usize,
    /// Timed runs per algorithm; the fastest is reported.
    pub repeats: usize,
}

impl BenchSpec {
    /// One warm-up and one timed run per algorithm.
    pub fn new(generator: GeneratorConfig) -> Self {
        BenchSpec { generator, factor: FactorConfig::default(), warmup: 1, repeats: 1 }
    }
}

/// Timing and accuracy of one algorithm on one density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgorithmResult {
    /// Fastest wall time over the timed repeats, in seconds.
    pub seconds: f64,
    /// Phase split of the last timed run.
    pub timings: PhaseTimings,
    /// `max_j ‖S(z_j) − Q(z_j)Q(z_j)ᴴ‖_∞` of the produced factor.
    pub c1: f64,
    /// Largest negative-power coefficient magnitude of the factor.
    pub c2: f64,
    /// Number of repair steps the driver performed.
    pub steps: usize,
}

/// One row of the comparison: both algorithms on one shared density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    /// Matrix dimension of the density.
    pub r: usize,
    /// Band of the generating polynomial.
    pub n: usize,
    /// Grid size.
    pub n_g: usize,
    /// Generator seed.
    pub seed: u64,
    /// Triangular-driver result, when requested.
    pub classic: Option<AlgorithmResult>,
    /// Doubling-driver result, when requested.
    pub doubling: Option<AlgorithmResult>,
    /// `classic.seconds / doubling.seconds`, when both ran.
    pub ratio: Option<f64>,
}

/// Full comparison report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    /// Host descriptor (OS, architecture, thread count).
    pub machine: String,
    /// Library version that produced the report.
    pub version: String,
    /// One row per benchmark case, in input order.
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Pretty-printed JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// FNV-1a over the exact bit patterns of the sample buffer.
fn checksum(s: &GridSamples) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut eat = |bits: u64| {
        for byte in bits.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for node in s.nodes() {
        for v in node.data() {
            eat(v.re.to_bits());
            eat(v.im.to_bits());
        }
    }
    h
}

fn run_one(
    algorithm: Algorithm,
    samples: &GridSamples,
    spec: &BenchSpec,
) -> Result<AlgorithmResult> {
    let fingerprint = checksum(samples);
    let mut best = f64::INFINITY;
    let mut last = None;
    for pass in 0..spec.warmup + spec.repeats.max(1) {
        let started = Instant::now();
        let (factor, timings, steps) = match algorithm {
            Algorithm::Classic => {
                let run = classic_factorize(samples, &spec.factor)?;
                (run.factor, run.timings, run.steps.len())
            }
            Algorithm::Doubling => {
                let run = doubling_factorize(samples, &spec.factor)?;
                (run.factor, run.timings, run.steps.len())
            }
        };
        let elapsed = started.elapsed().as_secs_f64();
        assert_eq!(
            checksum(samples),
            fingerprint,
            "input samples changed during a benchmark run"
        );
        if pass >= spec.warmup {
            best = best.min(elapsed);
            last = Some(AlgorithmResult {
                seconds: elapsed,
                timings,
                c1: factor_residual(samples, &factor),
                c2: anti_leakage(&factor),
                steps,
            });
        }
    }
    let mut result = last.expect("at least one timed pass");
    result.seconds = best;
    Ok(result)
}

/// Runs the requested algorithms on every spec, strictly serially, and
/// assembles the comparison report. Each spec's density is generated once
/// and shared; generation is excluded from all timings.
pub fn run_bench(specs: &[BenchSpec], algorithms: &[Algorithm]) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let samples = generate_density(&spec.generator)?.to_grid(spec.generator.n_g);
        let classic = if algorithms.contains(&Algorithm::Classic) {
            Some(run_one(Algorithm::Classic, &samples, spec)?)
        } else {
            None
        };
        let doubling = if algorithms.contains(&Algorithm::Doubling) {
            Some(run_one(Algorithm::Doubling, &samples, spec)?)
        } else {
            None
        };
        let ratio = match (&classic, &doubling) {
            (Some(c), Some(d)) if d.seconds > 0.0 => Some(c.seconds / d.seconds),
            _ => None,
        };
        rows.push(BenchRow {
            r: spec.generator.r,
            n: spec.generator.n,
            n_g: spec.generator.n_g,
            seed: spec.generator.seed,
            classic,
            doubling,
            ratio,
        });
    }
    Ok(BenchReport {
        machine: format!(
            "{}-{} ({} rayon threads)",
            std::env::consts::OS,
            std::env::consts::ARCH,
            rayon::current_num_threads()
        ),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_density_times_both_drivers_alike() {
        // At r = 1 both drivers reduce to the scalar seed path: no repair
        // steps, near-identical cost. The ratio is noisy at microsecond
        // scale, so the bound is deliberately loose.
        let spec = BenchSpec {
            repeats: 15,
            ..BenchSpec::new(GeneratorConfig::new(1, 2, 64, 3))
        };
        let report =
            run_bench(&[spec], &[Algorithm::Classic, Algorithm::Doubling]).unwrap();
        let row = &report.rows[0];
        let classic = row.classic.as_ref().unwrap();
        let doubling = row.doubling.as_ref().unwrap();
        assert_eq!(classic.steps, 0);
        assert_eq!(doubling.steps, 0);
        let ratio = row.ratio.unwrap();
        assert!(
            (0.05..20.0).contains(&ratio),
            "scalar-path ratio wildly off: {ratio}"
        );
        assert!(classic.c1 < 1e-12 && doubling.c1 < 1e-12);
    }

    #[test]
    fn report_carries_metrics_and_serializes() {
        let spec = BenchSpec {
            warmup: 0,
            ..BenchSpec::new(GeneratorConfig::new(4, 2, 64, 9))
        };
        let report = run_bench(&[spec], &[Algorithm::Doubling]).unwrap();
        let row = &report.rows[0];
        assert!(row.classic.is_none());
        let d = row.doubling.as_ref().unwrap();
        assert!(d.c1 < 1e-11);
        assert!(d.c1.is_finite() && d.c2.is_finite() && d.c1 >= 0.0 && d.c2 >= 0.0);
        assert!(d.seconds > 0.0);
        assert!(d.timings.total_seconds >= d.timings.seed_seconds);
        let text = report.to_json();
        let back: BenchReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.rows.len(), 1);
        assert_eq!(back.version, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Classic, Algorithm::Doubling] {
            let parsed: Algorithm = a.name().parse().unwrap();
            assert_eq!(parsed, a);
        }
        assert!("fast".parse::<Algorithm>().is_err());
    }
}
