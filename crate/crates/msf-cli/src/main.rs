//! Batch front end for matrix spectral factorization: generate test
//! densities, factorize them from files, verify existing factors, and time
//! the two drivers against each other.
//!
//! Exit codes: `0` on success, `2` for usage, configuration, and file
//! format errors, `3` for numerical failures (the run report, when
//! requested, records the failing stage).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use msf::io::{self, Payload};
use msf::mat::lq_positive;
use msf::{
    classic_factorize, doubling_factorize, generate_density, run_bench, Algorithm, BenchReport,
    BenchSpec, Error, FactorConfig, FactorReport, GeneratorConfig, GridSamples, Mat,
};

#[derive(Parser)]
#[command(name = "msf", version, about = "Spectral factorization of matrix densities on the unit circle", max_term_width = 100)]
struct Cli {
    /// Worker threads for node-parallel phases. Falls back to the
    /// MSF_THREADS environment variable, then to all logical cores.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random matrix density S = P·P̃ and write its grid samples
    Generate(GenerateArgs),
    /// Compute the analytic spectral factor S₊ of a density file
    Factorize(FactorizeArgs),
    /// Recompute accuracy metrics for an existing density/factor pair
    Verify(VerifyArgs),
    /// Time the triangular and block-doubling drivers on generated densities
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Matrix dimension
    #[arg(long)]
    r: usize,

    /// Order of the generating polynomial; the density has Laurent band
    /// [−order, order]
    #[arg(long)]
    order: usize,

    /// Grid size (power of two)
    #[arg(long)]
    grid: usize,

    /// Seed of the coefficient draw
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Draw real coefficients only (the default draws real and imaginary
    /// parts independently)
    #[arg(long)]
    real: bool,

    /// Bounds of the uniform entry draw, written "lo,hi"
    #[arg(long, value_parser = parse_bounds, default_value = "-1,1", allow_hyphen_values = true)]
    bounds: (f64, f64),

    /// Output path for the sampled density (MSFG)
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Also write the exact Laurent coefficients of the density (MSFC)
    #[arg(long, value_name = "PATH")]
    out_coeffs: Option<PathBuf>,
}

#[derive(Args)]
struct FactorizeArgs {
    /// Input density: MSFG grid samples or MSFC Laurent coefficients
    #[arg(long, value_name = "PATH")]
    input: PathBuf,

    /// Driver to run: "classic" or "doubling"
    #[arg(long, default_value = "doubling", value_parser = parse_algorithm)]
    algorithm: Algorithm,

    /// Grid size for coefficient input (power of two). Defaults to the
    /// smallest power of two holding four times the density band. An MSFG
    /// input fixes the grid itself; the flag must then agree with it.
    #[arg(long)]
    grid: Option<usize>,

    /// Write the factor's grid samples here (MSFG)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write the factor's full analytic coefficient table here (MSFC)
    #[arg(long, value_name = "PATH")]
    out_coeffs: Option<PathBuf>,

    /// Write a JSON run report here (also written on numerical failure,
    /// naming the failing stage)
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,

    /// Rotate the factor by the constant unitary that makes its constant
    /// coefficient lower triangular with positive real diagonal, fixing
    /// the gauge so factors of the same density diff cleanly
    #[arg(long)]
    normalize: bool,

    /// Verify every completion and every applied product while running
    /// (slower; failures then name the stage and superblock)
    #[arg(long)]
    check: bool,

    /// Tail-truncation threshold (relative); larger values shorten the
    /// per-step linear systems
    #[arg(long, value_name = "EPS")]
    eps_tail: Option<f64>,

    /// Anti-analytic leakage tolerance for checked completions
    #[arg(long, value_name = "TOL")]
    tol_analytic: Option<f64>,

    /// Paraunitarity tolerance for checked completions
    #[arg(long, value_name = "TOL")]
    tol_pu: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Density file (MSFG or MSFC)
    #[arg(long, value_name = "PATH")]
    density: PathBuf,

    /// Factor file (MSFG or MSFC)
    #[arg(long, value_name = "PATH")]
    factor: PathBuf,

    /// Grid size used to sample coefficient files; required only when both
    /// files are MSFC
    #[arg(long)]
    grid: Option<usize>,

    /// Write the recomputed metrics as a JSON report here
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Matrix dimensions to measure, comma separated
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    r: Vec<usize>,

    /// Order of every generated density
    #[arg(long, default_value_t = 10)]
    order: usize,

    /// Grid size (power of two)
    #[arg(long, default_value_t = 512)]
    grid: usize,

    /// Seed of every density draw
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Algorithms to time, comma separated
    #[arg(long, value_delimiter = ',', default_value = "classic,doubling", value_parser = parse_algorithm)]
    algorithms: Vec<Algorithm>,

    /// Untimed warm-up runs per algorithm
    #[arg(long, default_value_t = 1)]
    warmup: usize,

    /// Timed runs per algorithm; the fastest is reported
    #[arg(long, default_value_t = 1)]
    repeats: usize,

    /// Tail-truncation threshold for both drivers
    #[arg(long, value_name = "EPS")]
    eps_tail: Option<f64>,

    /// Write the comparison JSON here (printed to stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn parse_bounds(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| format!("expected \"lo,hi\", got {text:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

fn parse_algorithm(text: &str) -> Result<Algorithm, String> {
    Algorithm::from_str(text).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msf: error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn run(cli: Cli) -> msf::Result<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Factorize(args) => cmd_factorize(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// Installs the global worker pool: the `--threads` flag wins, then the
/// `MSF_THREADS` environment variable; otherwise rayon's default (all
/// logical cores) stands.
fn configure_threads(flag: Option<usize>) -> msf::Result<()> {
    let from_env = || -> msf::Result<Option<usize>> {
        match std::env::var("MSF_THREADS") {
            Ok(text) => {
                let n: usize = text.parse().map_err(|_| Error::InvalidConfig {
                    message: format!("MSF_THREADS must be a positive integer, got {text:?}"),
                })?;
                Ok(Some(n))
            }
            Err(_) => Ok(None),
        }
    };
    let Some(threads) = (match flag {
        Some(n) => Some(n),
        None => from_env()?,
    }) else {
        return Ok(());
    };
    if threads == 0 {
        return Err(Error::InvalidConfig { message: "thread count must be ≥ 1".into() });
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidConfig { message: format!("thread pool: {e}") })
}

fn cmd_generate(args: GenerateArgs) -> msf::Result<()> {
    let cfg = GeneratorConfig {
        r: args.r,
        n: args.order,
        n_g: args.grid,
        seed: args.seed,
        real: args.real,
        bounds: args.bounds,
    };
    let density = generate_density(&cfg)?;
    let samples = density.to_grid(cfg.n_g);
    io::save_samples(&args.out, &samples)?;
    println!(
        "wrote density r={} band ±{} on {} nodes → {}",
        cfg.r,
        cfg.n,
        cfg.n_g,
        args.out.display()
    );
    if let Some(path) = &args.out_coeffs {
        io::save_poly(path, &density)?;
        println!("wrote density coefficients → {}", path.display());
    }
    Ok(())
}

/// Resolves a factorization input to grid samples, honoring `--grid` for
/// coefficient inputs and rejecting a contradictory flag for sample inputs.
fn resolve_input(path: &Path, grid: Option<usize>) -> msf::Result<GridSamples> {
    match io::load_payload(path)? {
        Payload::Samples(s) => match grid {
            Some(g) if g != s.n_g() => Err(Error::InvalidConfig {
                message: format!(
                    "--grid {g} contradicts the input, which is sampled on {} nodes",
                    s.n_g()
                ),
            }),
            _ => Ok(s),
        },
        Payload::Coefficients(p) => {
            let band = p.n_neg() + p.n_pos() + 1;
            let n_g = grid.unwrap_or_else(|| (4 * band).next_power_of_two().max(16));
            if n_g < 2 || !n_g.is_power_of_two() {
                return Err(Error::InvalidConfig {
                    message: format!("grid size must be a power of two ≥ 2, got {n_g}"),
                });
            }
            if n_g < band {
                return Err(Error::InvalidConfig {
                    message: format!(
                        "grid size {n_g} cannot hold the {band}-coefficient band without aliasing"
                    ),
                });
            }
            Ok(p.to_grid(n_g))
        }
    }
}

fn cmd_factorize(args: FactorizeArgs) -> msf::Result<()> {
    let density = resolve_input(&args.input, args.grid)?;

    let mut cfg = FactorConfig { check_products: args.check, ..FactorConfig::default() };
    if let Some(x) = args.eps_tail {
        cfg.eps_tail = x;
    }
    if let Some(x) = args.tol_analytic {
        cfg.tol_analytic = x;
    }
    if let Some(x) = args.tol_pu {
        cfg.tol_pu = x;
    }
    cfg.validate()?;

    let outcome = match args.algorithm {
        Algorithm::Classic => {
            classic_factorize(&density, &cfg).map(|run| (run.factor, run.steps, run.timings))
        }
        Algorithm::Doubling => {
            doubling_factorize(&density, &cfg).map(|run| (run.factor, run.steps, run.timings))
        }
    };
    let (mut factor, steps, timings) = match outcome {
        Ok(parts) => parts,
        Err(e) => {
            // A numerical abort still produces a report naming the failing
            // stage, so batch callers can triage from the file alone.
            if let (Some(path), false) = (&args.report, e.is_config_error()) {
                let report =
                    FactorReport::for_failure(args.algorithm, density.r(), density.n_g(), &cfg, &e);
                std::fs::write(path, report.to_json()).map_err(Error::Io)?;
            }
            return Err(e);
        }
    };

    if args.normalize {
        normalize_gauge(&mut factor);
    }

    let report = FactorReport::for_run(args.algorithm, &density, &factor, &steps, timings, &cfg)?;
    let metrics = report.metrics.as_ref().expect("a completed run always carries metrics");
    println!(
        "{} r={} N_g={}: C1 {:.3e}, C2 {:.3e}, {} repairs, {:.2}s",
        report.algorithm,
        report.r,
        report.n_g,
        metrics.c1,
        metrics.c2,
        report.steps.len(),
        report.timings.total_seconds,
    );

    if let Some(path) = &args.out {
        io::save_samples(path, &factor)?;
        println!("wrote factor samples → {}", path.display());
    }
    if let Some(path) = &args.out_coeffs {
        let table = factor.to_poly(0, factor.n_g() - 1);
        io::save_poly(path, &table)?;
        println!("wrote factor coefficients → {}", path.display());
    }
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_json()).map_err(Error::Io)?;
        println!("wrote report → {}", path.display());
    }
    Ok(())
}

/// Right-multiplies the factor by the constant unitary that makes its
/// constant Laurent coefficient lower triangular with positive real
/// diagonal. The product S₊S₊ᴴ is untouched; the gauge becomes canonical.
fn normalize_gauge(factor: &mut GridSamples) {
    let r = factor.r();
    let n_g = factor.n_g();
    let mut c0 = Mat::zeros(r, r);
    for node in factor.nodes() {
        c0 = c0.add(node);
    }
    let c0 = c0.scale((1.0 / n_g as f64).into());
    let (_l, v) = lq_positive(&c0);
    let w = v.adjoint();
    for node in factor.nodes_mut() {
        *node = node.mul(&w);
    }
}

fn cmd_verify(args: VerifyArgs) -> msf::Result<()> {
    let density = io::load_payload(&args.density)?;
    let factor = io::load_payload(&args.factor)?;
    let n_g = match (&density, &factor, args.grid) {
        (_, _, Some(g)) if !g.is_power_of_two() || g < 2 => {
            return Err(Error::InvalidConfig {
                message: format!("grid size must be a power of two ≥ 2, got {g}"),
            })
        }
        (Payload::Samples(s), _, _) => s.n_g(),
        (_, Payload::Samples(s), _) => s.n_g(),
        (_, _, Some(g)) => g,
        (Payload::Coefficients(_), Payload::Coefficients(_), None) => {
            return Err(Error::InvalidConfig {
                message: "both files hold coefficients; pass --grid to pick the comparison grid"
                    .into(),
            })
        }
    };
    let to_samples = |p: Payload| match p {
        Payload::Samples(s) => s,
        Payload::Coefficients(p) => p.to_grid(n_g),
    };
    let density = to_samples(density);
    let factor = to_samples(factor);

    let report = FactorReport::for_verification(&density, &factor)?;
    let metrics = report.metrics.as_ref().expect("verification always carries metrics");
    match metrics.outer_gap {
        Some(gap) => println!(
            "C1 {:.3e}  C2 {:.3e}  outer gap {:.3e}",
            metrics.c1, metrics.c2, gap
        ),
        None => println!(
            "C1 {:.3e}  C2 {:.3e}  outer gap undefined (det S₊ vanishes at a node)",
            metrics.c1, metrics.c2
        ),
    }
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_json()).map_err(Error::Io)?;
        println!("wrote report → {}", path.display());
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> msf::Result<()> {
    if args.r.is_empty() || args.algorithms.is_empty() {
        return Err(Error::InvalidConfig {
            message: "need at least one matrix dimension and one algorithm".into(),
        });
    }
    if args.repeats == 0 {
        return Err(Error::InvalidConfig { message: "repeats must be ≥ 1".into() });
    }
    let specs: Vec<BenchSpec> = args
        .r
        .iter()
        .map(|&r| {
            let mut factor = FactorConfig::default();
            if let Some(x) = args.eps_tail {
                factor.eps_tail = x;
            }
            BenchSpec {
                generator: GeneratorConfig::new(r, args.order, args.grid, args.seed),
                factor,
                warmup: args.warmup,
                repeats: args.repeats,
            }
        })
        .collect();
    let report = run_bench(&specs, &args.algorithms)?;
    print_bench_table(&report);
    match &args.out {
        Some(path) => {
            std::fs::write(path, report.to_json()).map_err(Error::Io)?;
            println!("wrote comparison → {}", path.display());
        }
        None => println!("{}", report.to_json()),
    }
    Ok(())
}

fn print_bench_table(report: &BenchReport) {
    eprintln!("# {} (library {})", report.machine, report.version);
    for row in &report.rows {
        let mut line = format!("# r={:<4} n={} N_g={} seed={}", row.r, row.n, row.n_g, row.seed);
        for (name, result) in [("classic", &row.classic), ("doubling", &row.doubling)] {
            if let Some(res) = result {
                line.push_str(&format!(
                    "  {name} {:.3}s (C1 {:.3e}, C2 {:.3e})",
                    res.seconds, res.c1, res.c2
                ));
            }
        }
        if let Some(ratio) = row.ratio {
            line.push_str(&format!("  ratio {ratio:.2}"));
        }
        eprintln!("{line}");
    }
}
