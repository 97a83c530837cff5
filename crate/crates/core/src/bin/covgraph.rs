//! Command-line surface over the covgraph library.
//!
//! One subcommand per pipeline stage plus the experiment driver. Every
//! result a subcommand writes is produced by the same library calls a
//! direct user would make — the binary adds only argument parsing, file
//! I/O, and error formatting, so outputs are bit-identical to library
//! results at the same parameters and seed.
//!
//! Exit codes: 0 on success, 2 on usage errors (unknown flags, missing
//! required arguments — with usage text), 1 on runtime errors with a
//! structured JSON error object on stderr.
//!
//! `COVGRAPH_THREADS` caps the worker pool the experiment driver uses;
//! unset means one worker per core.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use covgraph::deconv::{
    default_gamma, least_squares_reconstruct, noise_moments, DeconvConfig, MarginalCdfEstimate,
    NoiseModel, TailPolicy, DEFAULT_A, DEFAULT_ALPHA, DEFAULT_QUAD_TOL, GAMMA_FLOOR,
};
use covgraph::diagnostics::irrepresentable_report;
use covgraph::error::Result;
use covgraph::glasso::{
    psd_repair, solve, GlassoProblem, GraphEstimate, DEFAULT_PSD_FLOOR, DEFAULT_SUPPORT_TOL,
};
use covgraph::harness::{
    auto_lambda_path_with, cells_to_csv, lambda_path_select, run_experiment, trials_to_csv,
    DeltaPolicy, ExperimentConfig, PathCriterion,
};
use covgraph::io::{
    read_batch_csv, read_matrix_csv, write_batch_csv, write_json, write_matrix_csv,
};
use covgraph::model::{BatchKind, CovarianceMatrix, PrecisionMatrix, SampleBatch, SensingSystem};
use covgraph::npn_cov::npn_pipeline_covariance;
use covgraph::param_cov::{
    bias_corrected_covariance, naive_covariance, refined_covariance,
};
use covgraph::synth::{
    band_ground_truth, make_sensing_matrix, nonparanormal_samples, sense, MarginalSpec, RngSeed,
};
use covgraph::{Error, RNG_ALGORITHM, SCHEMA_VERSION};

#[derive(Parser)]
#[command(
    name = "covgraph",
    about = "Conditional-independence graph recovery from indirect linear observations"
)]
struct Cli {
    /// Print version, schema, and RNG algorithm identifiers and exit.
    #[arg(long, global = true)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a band-graph ground truth and (optionally) synthetic batches.
    Synth(SynthArgs),
    /// Parametric covariance estimate from observations and the sensing matrix.
    EstimateParam(EstimateParamArgs),
    /// Nonparametric (nonparanormal) covariance estimate with stage diagnostics.
    EstimateNonparam(EstimateNonparamArgs),
    /// Deconvolved marginal CDF of one reconstructed coordinate on a grid.
    DeconvCdf(DeconvCdfArgs),
    /// Graphical lasso: precision matrix and edge set from a covariance estimate.
    Glasso(GlassoArgs),
    /// Theory diagnostics of a precision matrix (irrepresentability report).
    Diagnose(DiagnoseArgs),
    /// Run a full synthetic experiment grid from a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Band,
}

#[derive(Clone, Copy, ValueEnum)]
enum MarginalKind {
    Gaussian,
    Uniform,
    Exponential,
    Mixture,
}

impl From<MarginalKind> for MarginalSpec {
    fn from(m: MarginalKind) -> Self {
        match m {
            MarginalKind::Gaussian => MarginalSpec::GaussianIdentity,
            MarginalKind::Uniform => MarginalSpec::Uniform01,
            MarginalKind::Exponential => MarginalSpec::ExponentialRate1,
            MarginalKind::Mixture => MarginalSpec::GaussMixture4,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Latent dimension (number of graph vertices).
    #[arg(long)]
    p: usize,
    /// Graph family of the ground truth.
    #[arg(long, value_enum, default_value = "band")]
    graph: GraphKind,
    /// Diagonal weight of the band precision matrix.
    #[arg(long)]
    rho1: f64,
    /// Off-diagonal (first band) weight.
    #[arg(long)]
    rho2: f64,
    /// Rescale Σ = Θ⁻¹ to a correlation matrix (unit diagonal).
    #[arg(long)]
    normalize: bool,
    /// Output path for the precision matrix Θ (CSV).
    #[arg(long)]
    out: PathBuf,
    /// Also write the covariance Σ = Θ⁻¹ here (CSV).
    #[arg(long)]
    sigma_out: Option<PathBuf>,
    /// Number of latent samples to draw (requires --seed and --x-out).
    #[arg(long)]
    n: Option<usize>,
    /// Marginal family for the latent samples.
    #[arg(long, value_enum, default_value = "gaussian")]
    marginal: MarginalKind,
    /// Output path for the latent sample batch X (CSV, samples as rows).
    #[arg(long)]
    x_out: Option<PathBuf>,
    /// Sensing rows d (requires --seed; with --y-out also draws observations).
    #[arg(long)]
    d: Option<usize>,
    /// Observation noise variance σ².
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Output path for the sensing matrix A (CSV).
    #[arg(long)]
    a_out: Option<PathBuf>,
    /// Output path for the observed batch Y = AX + W (CSV, samples as rows).
    #[arg(long)]
    y_out: Option<PathBuf>,
    /// RNG seed — mandatory whenever samples or a sensing matrix are drawn.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamEstimator {
    Refined,
    Naive,
    BiasCorrected,
}

#[derive(Args)]
struct EstimateParamArgs {
    /// Observed batch Y (CSV, samples as rows).
    #[arg(long)]
    y: PathBuf,
    /// Sensing matrix A (CSV, d rows × p columns).
    #[arg(long)]
    a: PathBuf,
    /// Observation noise variance σ².
    #[arg(long)]
    sigma2: f64,
    /// Which estimator to apply.
    #[arg(long, value_enum, default_value = "refined")]
    estimator: ParamEstimator,
    /// Output path for Σ̂ (CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateNonparamArgs {
    /// Observed batch Y (CSV, samples as rows).
    #[arg(long)]
    y: PathBuf,
    /// Sensing matrix A (CSV, d rows × p columns).
    #[arg(long)]
    a: PathBuf,
    /// Observation noise variance σ².
    #[arg(long)]
    sigma2: f64,
    /// Ridge level γ for the deconvolution (overrides the tuning rule).
    #[arg(long)]
    gamma: Option<f64>,
    /// Constant c₀ of the γ tuning rule (used when --gamma is absent).
    #[arg(long, default_value_t = 1.0)]
    gamma_c0: f64,
    /// Truncation level δ for the Gaussianizing transform (default: the
    /// sample-size rule 1/(4·n^{1/4}·√(π·ln n))).
    #[arg(long)]
    delta: Option<f64>,
    /// Relative quadrature tolerance of the deconvolution integrals.
    #[arg(long, default_value_t = 1e-4)]
    quad_tol: f64,
    /// Eigenvalue floor for the positive-definite repair of Σ̂; pass 0 to
    /// write the raw (possibly indefinite) stage output.
    #[arg(long, default_value_t = DEFAULT_PSD_FLOOR)]
    psd_floor: f64,
    /// Output path for Σ̂ (CSV).
    #[arg(long)]
    out: PathBuf,
    /// Output path for the per-coordinate stage diagnostics (JSON).
    #[arg(long)]
    diagnostics_out: PathBuf,
}

#[derive(Args)]
struct DeconvCdfArgs {
    /// Reconstructed batch X̂ (CSV, samples as rows).
    #[arg(long)]
    xhat: PathBuf,
    /// Coordinate whose marginal CDF to estimate (0-based).
    #[arg(long, default_value_t = 0)]
    coordinate: usize,
    /// Observation noise variance σ² of the original sensing channel.
    #[arg(long)]
    sigma2: f64,
    /// Sensing rows d of the original channel (d > p).
    #[arg(long)]
    d: usize,
    /// Ridge level γ (overrides the tuning rule).
    #[arg(long)]
    gamma: Option<f64>,
    /// Constant c₀ of the γ tuning rule (used when --gamma is absent).
    #[arg(long, default_value_t = 1.0)]
    gamma_c0: f64,
    /// Truncation level δ for the truncated column F̂ᵗʳ.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    quad_tol: f64,
    /// Left end of the evaluation grid.
    #[arg(long)]
    grid_min: f64,
    /// Right end of the evaluation grid.
    #[arg(long)]
    grid_max: f64,
    /// Number of evenly spaced grid points.
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    /// Output path for the (x, F̂(x), F̂ᵗʳ(x)) table (CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathSelect {
    Bic,
    Target,
}

#[derive(Args)]
struct GlassoArgs {
    /// Covariance estimate Σ̂ (CSV). Repaired to positive definite before
    /// solving unless --psd-floor 0 is passed and it already is.
    #[arg(long)]
    sigma: PathBuf,
    /// Fixed penalty λ. Mutually exclusive with --select.
    #[arg(long, conflicts_with = "select")]
    lambda: Option<f64>,
    /// Sweep an automatic λ path and select a model instead of fixing λ.
    #[arg(long, value_enum)]
    select: Option<PathSelect>,
    /// Sample count behind Σ̂ (required by the BIC selection score).
    #[arg(long)]
    n: Option<usize>,
    /// Edge-count target for --select target.
    #[arg(long)]
    target_edges: Option<usize>,
    /// Points on the automatic λ path.
    #[arg(long, default_value_t = 15)]
    path_points: usize,
    /// Path floor as a fraction of the largest off-diagonal magnitude.
    #[arg(long, default_value_t = 0.05)]
    path_floor_ratio: f64,
    /// Eigenvalue floor for the positive-definite repair of Σ̂.
    #[arg(long, default_value_t = DEFAULT_PSD_FLOOR)]
    psd_floor: f64,
    /// Support tolerance: |Θ̂_ij| above this counts as an edge.
    #[arg(long, default_value_t = DEFAULT_SUPPORT_TOL)]
    support_tol: f64,
    /// Output path for Θ̂ (CSV).
    #[arg(long)]
    out: PathBuf,
    /// Output path for the signed edge list (JSON).
    #[arg(long)]
    edges_out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Precision matrix Θ (CSV).
    #[arg(long)]
    theta: PathBuf,
    /// Output path for the report (JSON); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for results.json, cells.csv, and trials.csv.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.version {
        println!("covgraph {} schema={SCHEMA_VERSION} rng={RNG_ALGORITHM}", env!("CARGO_PKG_VERSION"));
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        // No subcommand and no --version: usage error, exit 2 like clap's
        // own parse failures.
        let mut cmd = <Cli as clap::CommandFactory>::command();
        eprintln!("{}", cmd.render_usage());
        eprintln!("try `covgraph --help` for the subcommand list");
        return ExitCode::from(2);
    };

    if let Ok(threads) = std::env::var("COVGRAPH_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                // A second initialization (e.g. in tests) is harmless; the
                // pool keeps its first configuration.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("{}", error_json("config", &Error::InvalidArgument(format!(
                    "COVGRAPH_THREADS must be a positive integer, got {threads:?}"
                ))));
                return ExitCode::from(1);
            }
        }
    }

    let (name, outcome) = match &command {
        Command::Synth(a) => ("synth", run_synth(a)),
        Command::EstimateParam(a) => ("estimate-param", run_estimate_param(a)),
        Command::EstimateNonparam(a) => ("estimate-nonparam", run_estimate_nonparam(a)),
        Command::DeconvCdf(a) => ("deconv-cdf", run_deconv_cdf(a)),
        Command::Glasso(a) => ("glasso", run_glasso(a)),
        Command::Diagnose(a) => ("diagnose", run_diagnose(a)),
        Command::Experiment(a) => ("experiment", run_experiment_cmd(a)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(name, &e));
            ExitCode::from(1)
        }
    }
}

/// Structured runtime-error line: `{"schema":…,"command":…,"error":…}`.
fn error_json(command: &str, e: &Error) -> String {
    serde_json::json!({
        "schema": SCHEMA_VERSION,
        "command": command,
        "error": e.to_string(),
    })
    .to_string()
}

fn run_synth(a: &SynthArgs) -> Result<()> {
    let GraphKind::Band = a.graph;
    let truth = band_ground_truth(a.p, a.rho1, a.rho2, a.normalize)?;
    write_matrix_csv(&a.out, truth.theta.as_matrix())?;
    if let Some(path) = &a.sigma_out {
        write_matrix_csv(path, truth.sigma.as_matrix())?;
    }

    let generative = a.n.is_some() || a.d.is_some();
    if !generative {
        for (flag, set) in [
            ("--x-out", a.x_out.is_some()),
            ("--a-out", a.a_out.is_some()),
            ("--y-out", a.y_out.is_some()),
        ] {
            if set {
                return Err(Error::InvalidArgument(format!(
                    "{flag} needs the matching size flag (--n / --d)"
                )));
            }
        }
        return Ok(());
    }
    let seed = a.seed.ok_or_else(|| {
        Error::InvalidArgument("--seed is mandatory when drawing samples or a sensing matrix".into())
    })?;
    let seed = RngSeed(seed);

    let x = match a.n {
        Some(n) => {
            let x = nonparanormal_samples(&truth.sigma, a.marginal.into(), n, seed.derive(1))?;
            if let Some(path) = &a.x_out {
                write_batch_csv(path, &x)?;
            }
            Some(x)
        }
        None => {
            if a.x_out.is_some() {
                return Err(Error::InvalidArgument("--x-out needs --n".into()));
            }
            None
        }
    };

    match a.d {
        Some(d) => {
            let sensing = make_sensing_matrix(d, a.p, seed.derive(2))?;
            if let Some(path) = &a.a_out {
                write_matrix_csv(path, &sensing)?;
            }
            if let Some(path) = &a.y_out {
                let x = x.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("--y-out needs --n to draw the latent batch".into())
                })?;
                let sys = SensingSystem::new(sensing, a.sigma2)?;
                let y = sense(x, &sys, seed.derive(3))?;
                write_batch_csv(path, &y)?;
            }
        }
        None => {
            if a.a_out.is_some() || a.y_out.is_some() {
                return Err(Error::InvalidArgument("--a-out/--y-out need --d".into()));
            }
        }
    }
    Ok(())
}

fn read_observations(y: &PathBuf, a: &PathBuf, sigma2: f64) -> Result<(SampleBatch, SensingSystem)> {
    let y = read_batch_csv(y, BatchKind::ObservedY, false)?;
    let a = read_matrix_csv(a)?;
    let sys = SensingSystem::new(a, sigma2)?;
    if y.dim() != sys.d() {
        return Err(Error::Dimension(format!(
            "observation dimension {} does not match sensing rows {}",
            y.dim(),
            sys.d()
        )));
    }
    Ok((y, sys))
}

fn run_estimate_param(a: &EstimateParamArgs) -> Result<()> {
    let (y, sys) = read_observations(&a.y, &a.a, a.sigma2)?;
    let sigma_hat: DMatrix<f64> = match a.estimator {
        ParamEstimator::Refined => refined_covariance(&y, &sys)?.sigma_hat.into_matrix(),
        ParamEstimator::Naive => naive_covariance(&y, &sys)?,
        ParamEstimator::BiasCorrected => bias_corrected_covariance(&y, &sys)?,
    };
    write_matrix_csv(&a.out, &sigma_hat)
}

fn run_estimate_nonparam(a: &EstimateNonparamArgs) -> Result<()> {
    let (y, sys) = read_observations(&a.y, &a.a, a.sigma2)?;
    let xhat = least_squares_reconstruct(&y, &sys)?;
    let noise = noise_moments(&sys)?;
    let (n, p, d) = (xhat.n(), xhat.dim(), sys.d());
    let gamma = match a.gamma {
        Some(g) => g,
        None => default_gamma(n, p, d, a.sigma2, DEFAULT_A, a.gamma_c0)?.max(GAMMA_FLOOR),
    };
    let cfg = DeconvConfig::new(DEFAULT_A, gamma, DEFAULT_ALPHA, a.quad_tol, TailPolicy::KernelDeath)?;
    let delta = match a.delta {
        Some(v) => DeltaPolicy::Fixed { value: v }.resolve(n, d, p)?,
        None => DeltaPolicy::LiuStyle.resolve(n, d, p)?,
    };
    let (raw, diagnostics) = npn_pipeline_covariance(&xhat, &noise, &cfg, delta)?;
    let sigma_hat = if a.psd_floor > 0.0 {
        psd_repair(&raw, a.psd_floor)?.into_matrix()
    } else {
        raw
    };
    write_matrix_csv(&a.out, &sigma_hat)?;
    let clamped: Vec<usize> = diagnostics
        .iter()
        .filter(|s| s.variance_clamped)
        .map(|s| s.coordinate)
        .collect();
    let nonmono_total: usize = diagnostics.iter().map(|s| s.nonmonotone_pairs).sum();
    write_json(
        &a.diagnostics_out,
        &serde_json::json!({
            "schema": SCHEMA_VERSION,
            "n": n,
            "p": p,
            "d": d,
            "sigma2": a.sigma2,
            "gamma": gamma,
            "delta": delta,
            "psd_floor": a.psd_floor,
            "variance_clamped_coordinates": clamped,
            "nonmonotone_pairs_total": nonmono_total,
            "coordinates": diagnostics,
        }),
    )
}

fn run_deconv_cdf(a: &DeconvCdfArgs) -> Result<()> {
    let xhat = read_batch_csv(&a.xhat, BatchKind::ReconstructedXhat, false)?;
    let (n, p) = (xhat.n(), xhat.dim());
    let noise = NoiseModel::new(a.sigma2, a.d, p)?;
    let gamma = match a.gamma {
        Some(g) => g,
        None => default_gamma(n, p, a.d, a.sigma2, DEFAULT_A, a.gamma_c0)?.max(GAMMA_FLOOR),
    };
    let cfg = DeconvConfig::new(DEFAULT_A, gamma, DEFAULT_ALPHA, a.quad_tol, TailPolicy::KernelDeath)?;
    let est = MarginalCdfEstimate::from_batch(&xhat, a.coordinate, noise, cfg, a.delta)?;

    if a.grid_points < 2 || !(a.grid_min < a.grid_max) {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 2 points and min < max, got {} points on [{}, {}]",
            a.grid_points, a.grid_min, a.grid_max
        )));
    }
    let step = (a.grid_max - a.grid_min) / (a.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..a.grid_points).map(|k| a.grid_min + k as f64 * step).collect();
    let raw = est.evaluate_many(&grid)?;

    let mut out = String::with_capacity(grid.len() * 48 + 64);
    out.push_str(&format!(
        "# {} deconv-cdf coordinate={} gamma={gamma} delta={}\n",
        covgraph::io::CSV_SCHEMA,
        a.coordinate,
        a.delta
    ));
    out.push_str("x,cdf,cdf_truncated\n");
    for (x, f) in grid.iter().zip(&raw) {
        let tr = f.clamp(a.delta, 1.0 - a.delta);
        out.push_str(&format!("{x},{f},{tr}\n"));
    }
    covgraph::io::atomic_write(&a.out, out.as_bytes())
}

fn run_glasso(a: &GlassoArgs) -> Result<()> {
    let raw = read_matrix_csv(&a.sigma)?;
    let sigma_hat = if a.psd_floor > 0.0 {
        psd_repair(&raw, a.psd_floor)?
    } else {
        CovarianceMatrix::new(raw)?
    };

    let (lambda, est): (f64, GraphEstimate) = match (a.lambda, a.select) {
        (Some(lambda), None) => {
            let mut problem = GlassoProblem::new(sigma_hat, lambda)?;
            problem.support_tol = a.support_tol;
            let est = solve(&problem)?;
            (lambda, est)
        }
        (None, Some(selector)) => {
            let criterion = match selector {
                PathSelect::Bic => PathCriterion::Bic,
                PathSelect::Target => PathCriterion::FixedTarget {
                    edges: a.target_edges.ok_or_else(|| {
                        Error::InvalidArgument("--select target needs --target-edges".into())
                    })?,
                },
            };
            let n = match selector {
                PathSelect::Bic => a.n.ok_or_else(|| {
                    Error::InvalidArgument("--select bic needs --n (the sample count)".into())
                })?,
                // The edge-count target never reads n; any valid value works.
                PathSelect::Target => a.n.unwrap_or(2),
            };
            let lambdas = auto_lambda_path_with(&sigma_hat, a.path_points, a.path_floor_ratio);
            let mut template = GlassoProblem::new(sigma_hat.clone(), lambdas[0])?;
            template.support_tol = a.support_tol;
            lambda_path_select(&sigma_hat, n, &lambdas, criterion, &template)?
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "pass either --lambda <value> or --select <bic|target>".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with enforces exclusivity"),
    };

    write_matrix_csv(&a.out, est.theta_hat.as_matrix())?;
    if let Some(path) = &a.edges_out {
        let edges: Vec<serde_json::Value> = est
            .edges
            .iter()
            .map(|(i, j)| {
                serde_json::json!({
                    "i": i,
                    "j": j,
                    "sign": est.edges.sign(i, j),
                })
            })
            .collect();
        write_json(
            path,
            &serde_json::json!({
                "schema": SCHEMA_VERSION,
                "p": est.edges.p(),
                "lambda": lambda,
                "converged": est.converged,
                "iterations": est.iterations,
                "kkt_residual": est.kkt_residual,
                "edge_count": est.edges.len(),
                "edges": edges,
            }),
        )?;
    }
    Ok(())
}

fn run_diagnose(a: &DiagnoseArgs) -> Result<()> {
    let theta = PrecisionMatrix::new(read_matrix_csv(&a.theta)?)?;
    let report = irrepresentable_report(&theta)?;
    let body = serde_json::json!({
        "schema": SCHEMA_VERSION,
        "report": report,
    });
    match &a.out {
        Some(path) => write_json(path, &body),
        None => {
            let text = serde_json::to_string_pretty(&body)
                .map_err(|e| Error::InvalidArgument(format!("JSON serialization failed: {e}")))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn run_experiment_cmd(a: &ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)?;
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    std::fs::create_dir_all(&a.out)?;
    let result = run_experiment(&cfg)?;
    let json = result.to_json()?;
    covgraph::io::atomic_write(&a.out.join("results.json"), json.as_bytes())?;
    covgraph::io::atomic_write(&a.out.join("cells.csv"), cells_to_csv(&result).as_bytes())?;
    covgraph::io::atomic_write(&a.out.join("trials.csv"), trials_to_csv(&result).as_bytes())?;
    Ok(())
}
