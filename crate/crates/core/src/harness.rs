//! End-to-end experiment orchestration: synthetic ground truths, the four
//! recovery pipelines (parametric, nonparametric, and the two rank-based
//! baselines), λ selection policies, Monte Carlo grids over (n, d, σ²)
//! with per-trial derived seeds, deterministic parallel execution, and
//! CSV-sample ingestion for real data.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deconv::{
    beta_exponent, default_delta_ndp, default_gamma, least_squares_reconstruct, noise_moments,
    DeconvConfig, NoiseModel, TailPolicy, DEFAULT_A, DEFAULT_ALPHA, GAMMA_FLOOR,
};
use crate::diagnostics::{
    irrepresentable_report, recall_precision, RecoveryMetrics, TheoryReport,
    DEFAULT_FISHER_CEILING,
};
use crate::error::{Error, Result};
use crate::glasso::{
    psd_repair, solve, solve_path, GlassoProblem, GraphEstimate, lambda_nonparam_rule,
    lambda_param_rule,
};
use crate::model::{
    support_and_signs, BatchKind, CovarianceMatrix, EdgeSet, SampleBatch, SensingSystem,
};
use crate::normal::normal_quantile;
use crate::npn_cov::{moment_estimates, npn_pipeline_covariance, transformed_covariance};
use crate::param_cov::{refined_covariance, tau_infinity, TauConstants};
use crate::synth::{
    band_ground_truth, make_sensing_matrix, nonparanormal_samples, GroundTruth, MarginalSpec,
    RngSeed,
};
use crate::{RNG_ALGORITHM, SCHEMA_VERSION};

/// Which estimator chain turns observations into a covariance for the
/// graphical lasso.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    /// Gaussian latents: refined closed-form covariance from Y directly.
    Parametric,
    /// Full nonparametric chain: least-squares reconstruction, marginal
    /// CDF deconvolution, Gaussianizing transform, covariance.
    Nonparametric,
    /// Rank-transform covariance on the first p coordinates of Y taken as
    /// if they were X (defined only when d ≥ p).
    BaselineDirect,
    /// Least-squares reconstruction, then the rank (empirical-CDF)
    /// transform without deconvolution.
    BaselineLsNoDeconv,
}

/// Ground-truth graph family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSpec {
    /// Tridiagonal precision: diagonal rho1, first off-diagonal rho2,
    /// rescaled so Σ is a correlation matrix.
    Band { rho1: f64, rho2: f64 },
}

/// How a λ is chosen for the graphical lasso in each trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaPolicy {
    /// One fixed value for every cell.
    Fixed { value: f64 },
    /// Theory rule λ = scale·8·τ∞/θ (synthetic mode only: needs the true
    /// Σ and a positive irrepresentability margin).
    ParamRule { scale: f64 },
    /// Theory rule λ = c0·θ⁻¹·max(ln n/n^¼, ln(d−p)/(d−p)^{β/4}).
    NonparamRule { c0: f64 },
    /// Warm-started sweep over a decreasing λ path; an empty list means
    /// "derive the path from the data" (from the largest off-diagonal of
    /// Σ̂ down to 5% of it, 15 points).
    PathSweep {
        lambdas: Vec<f64>,
        criterion: PathCriterion,
    },
}

/// Model-selection rule applied along a λ path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathCriterion {
    /// n·(−logdet Θ̂ + tr(Σ̂Θ̂)) + ln(n)·|edges|, minimized; ties keep the
    /// larger (sparser) λ. Sound for real data of unknown sparsity, but
    /// note that on a penalized path the fit term also improves as the
    /// existing edges unshrink, so BIC tends toward the dense end when
    /// the covariance estimate is noisy.
    Bic,
    /// The λ whose edge count is closest to the target; ties keep the
    /// larger λ. With the target set to the true edge count this scores
    /// edge selection at oracle sparsity (precision-at-k style), the mode
    /// the synthetic studies use.
    FixedTarget { edges: usize },
}

/// How the CDF truncation level δ is chosen in nonparametric pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaPolicy {
    /// The theory formula δ = min(c0/(n^¼·√(π ln n)) + c1·(d−p)^{−β/4}, 0.499).
    /// Its unit-constant form saturates the clamp at practical sizes.
    TunedFormula { c0: f64, c1: f64 },
    /// A fixed level in (0, 1/2).
    Fixed { value: f64 },
    /// The classical rank-estimator level 1/(4·n^¼·√(π ln n)).
    LiuStyle,
}

impl DeltaPolicy {
    /// Resolves the policy to a concrete truncation level.
    pub fn resolve(&self, n: usize, d: usize, p: usize) -> Result<f64> {
        match *self {
            DeltaPolicy::TunedFormula { c0, c1 } => {
                let beta = beta_exponent(DEFAULT_A, DEFAULT_ALPHA);
                default_delta_ndp(n, p, d, beta, c0, c1)
            }
            DeltaPolicy::Fixed { value } => {
                if !(value > 0.0 && value < 0.5) {
                    return Err(Error::InvalidArgument(format!(
                        "fixed truncation level must lie in (0, 1/2), got {value}"
                    )));
                }
                Ok(value)
            }
            DeltaPolicy::LiuStyle => {
                if n < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "truncation level needs n ≥ 2, got {n}"
                    )));
                }
                let nf = n as f64;
                Ok(1.0 / (4.0 * nf.powf(0.25) * (std::f64::consts::PI * nf.ln()).sqrt()))
            }
        }
    }
}

/// A full experiment description; the TOML schema of the CLI mirrors the
/// field names verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pipeline: PipelineKind,
    /// Latent dimension.
    pub p: usize,
    pub graph: GraphSpec,
    /// Latent marginal (nonparametric pipelines; the parametric pipeline
    /// requires `gaussian_identity`).
    pub marginal: MarginalSpec,
    /// Sample-size grid.
    pub ns: Vec<usize>,
    /// Observation-dimension grid.
    pub ds: Vec<usize>,
    /// Noise-variance grid.
    pub sigma2s: Vec<f64>,
    /// Monte Carlo repetitions per cell.
    pub trials: usize,
    /// Master seed; all randomness derives from it.
    pub seed: u64,
    pub lambda: LambdaPolicy,
    /// Truncation policy for nonparametric pipelines.
    #[serde(default = "default_delta_policy")]
    pub delta: DeltaPolicy,
    /// Deconvolution bandwidth constant c0 of the γ tuning rule.
    #[serde(default = "default_gamma_c0")]
    pub gamma_c0: f64,
    /// Certified quadrature tolerance for deconvolution.
    #[serde(default = "default_quad_tol_cfg")]
    pub quad_tol: f64,
    /// |Θ̂_ij| threshold for reporting an edge.
    #[serde(default = "default_support_tol")]
    pub support_tol: f64,
    /// Graphical-lasso sweep tolerance.
    #[serde(default = "default_glasso_tol")]
    pub glasso_tol: f64,
    /// Number of points in the data-derived λ path (PathSweep with an
    /// empty explicit list).
    #[serde(default = "default_path_points")]
    pub path_points: usize,
    /// Floor of the data-derived λ path as a fraction of its top.
    #[serde(default = "default_path_floor_ratio")]
    pub path_floor_ratio: f64,
}

fn default_delta_policy() -> DeltaPolicy {
    DeltaPolicy::LiuStyle
}
fn default_gamma_c0() -> f64 {
    1.0
}
fn default_quad_tol_cfg() -> f64 {
    1e-4
}
fn default_support_tol() -> f64 {
    crate::glasso::DEFAULT_SUPPORT_TOL
}
fn default_glasso_tol() -> f64 {
    crate::glasso::DEFAULT_TOL
}
fn default_path_points() -> usize {
    15
}
fn default_path_floor_ratio() -> f64 {
    0.05
}

impl ExperimentConfig {
    /// Checks the grid/trial invariants and numeric ranges.
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidArgument(format!(
                "need p ≥ 2, got {}",
                self.p
            )));
        }
        if self.ns.is_empty() || self.ds.is_empty() || self.sigma2s.is_empty() {
            return Err(Error::InvalidArgument(
                "the (n, d, σ²) grid must be nonempty in every dimension".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("need trials ≥ 1".into()));
        }
        if self.ns.iter().any(|&n| n < 2) {
            return Err(Error::InvalidArgument("every n must be ≥ 2".into()));
        }
        if self.ds.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument("every d must be ≥ 1".into()));
        }
        if self.sigma2s.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(
                "every σ² must be finite and ≥ 0".into(),
            ));
        }
        if !(self.gamma_c0 > 0.0 && self.gamma_c0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma_c0 must be finite and > 0, got {}",
                self.gamma_c0
            )));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "quad_tol must lie in (0, 1/2], got {}",
                self.quad_tol
            )));
        }
        if !(self.support_tol >= 0.0) || !(self.glasso_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "need support_tol ≥ 0 and glasso_tol > 0".into(),
            ));
        }
        if self.path_points == 0 {
            return Err(Error::InvalidArgument("need path_points ≥ 1".into()));
        }
        if !(self.path_floor_ratio > 0.0 && self.path_floor_ratio < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "path_floor_ratio must lie in (0, 1), got {}",
                self.path_floor_ratio
            )));
        }
        if let LambdaPolicy::Fixed { value } = self.lambda {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "fixed λ must be finite and ≥ 0, got {value}"
                )));
            }
        }
        if let LambdaPolicy::PathSweep { ref lambdas, .. } = self.lambda {
            if !lambdas.is_empty() && lambdas.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::InvalidArgument(
                    "an explicit λ path must be strictly decreasing".into(),
                ));
            }
        }
        if self.pipeline == PipelineKind::Parametric
            && self.marginal != MarginalSpec::GaussianIdentity
        {
            return Err(Error::InvalidArgument(
                "the parametric pipeline models Gaussian latents; set marginal = \
                 \"gaussian_identity\""
                    .into(),
            ));
        }
        Ok(())
    }

    /// Parses a TOML config and validates it.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Stable 64-bit FNV-1a hash of the canonical JSON encoding, for
    /// provenance stamping.
    pub fn content_hash(&self) -> Result<String> {
        let json = serde_json::to_string(self)
            .map_err(|e| Error::InvalidArgument(format!("config serialization: {e}")))?;
        let mut h: u64 = 0xcbf29ce484222325;
        for b in json.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        Ok(format!("{h:016x}"))
    }
}

/// One (cell, trial) outcome. Failed trials carry the error text instead
/// of scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub d: usize,
    pub sigma2: f64,
    pub trial: usize,
    /// Index of the derived seed stream, for replaying a single trial.
    pub seed_index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_consistent: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregates over the successful trials of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub d: usize,
    pub sigma2: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
    /// True when any trial in the cell failed.
    pub degraded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd_recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd_precision: Option<f64>,
    /// Fraction of successful trials with exact signed-support recovery.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_consistency_rate: Option<f64>,
    /// Theory diagnostics of the ground truth (None above the Fisher
    /// ceiling, where Γ cannot be materialized).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryReport>,
}

/// Wall-clock accounting, kept in its own subtree so determinism checks
/// can exclude it wholesale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub total_seconds: f64,
    /// Aligned with the `cells` array of the result.
    pub cell_seconds: Vec<f64>,
}

/// The complete outcome of `run_experiment`: provenance, per-cell
/// aggregates, raw per-trial records, and (optional) timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: String,
    pub rng_algorithm: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub cells: Vec<CellSummary>,
    pub trials: Vec<TrialRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingStats>,
}

impl ExperimentResult {
    /// JSON with the timing subtree removed — byte-identical across reruns
    /// of the same (config, seed), regardless of thread count.
    pub fn canonical_json(&self) -> Result<String> {
        let mut clone = self.clone();
        clone.timing = None;
        serde_json::to_string_pretty(&clone)
            .map_err(|e| Error::InvalidArgument(format!("result serialization: {e}")))
    }

    /// Full JSON including timing.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArgument(format!("result serialization: {e}")))
    }
}

/// Symmetrized empirical CDF of the sample column evaluated at its own
/// points: (#{x_t < x_s} + ½·#{x_t = x_s})/n, ties splitting mass evenly.
/// This is the noiseless limit of the deconvolution estimator.
pub fn symmetrized_ecdf(samples: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "empirical CDF of an empty sample is undefined".into(),
        ));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "empirical CDF requires finite samples".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| samples[a].partial_cmp(&samples[b]).unwrap());
    let mut out = vec![0.0; n];
    let nf = n as f64;
    let mut k = 0;
    while k < n {
        let mut j = k;
        while j + 1 < n && samples[order[j + 1]] == samples[order[k]] {
            j += 1;
        }
        // Positions k..=j share the same value: k strictly below, j-k+1 tied.
        let val = (k as f64 + 0.5 * (j - k + 1) as f64) / nf;
        for &idx in &order[k..=j] {
            out[idx] = val;
        }
        k = j + 1;
    }
    Ok(out)
}

/// Rank-transform covariance used by the baselines: per coordinate, the
/// symmetrized ECDF (in place of the deconvolved CDF), truncation, and the
/// Gaussianizing transform with noise-corrected moments; then the
/// covariance of the transformed batch.
fn rank_transform_covariance(
    batch: &SampleBatch,
    noise: &NoiseModel,
    delta: f64,
) -> Result<DMatrix<f64>> {
    let (p, n) = (batch.dim(), batch.n());
    let mut h = DMatrix::zeros(p, n);
    for i in 0..p {
        let col = batch.coordinate(i);
        let m = moment_estimates(&col, noise)?;
        let u = symmetrized_ecdf(&col)?;
        for s in 0..n {
            let uc = u[s].clamp(delta, 1.0 - delta);
            h[(i, s)] = m.m_hat + m.v_hat * normal_quantile(uc)?;
        }
    }
    transformed_covariance(&h)
}

/// Data-driven default λ path: from the largest off-diagonal magnitude of
/// Σ̂ (the empty-graph threshold) down to 5% of it, 15 log-spaced points.
pub fn auto_lambda_path(sigma_hat: &CovarianceMatrix) -> Vec<f64> {
    auto_lambda_path_with(sigma_hat, default_path_points(), default_path_floor_ratio())
}

/// [`auto_lambda_path`] with explicit point count and floor ratio.
pub fn auto_lambda_path_with(
    sigma_hat: &CovarianceMatrix,
    points: usize,
    floor_ratio: f64,
) -> Vec<f64> {
    let m = sigma_hat.as_matrix();
    let p = m.nrows();
    let mut lmax = 0.0_f64;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                lmax = lmax.max(m[(i, j)].abs());
            }
        }
    }
    if !(lmax > 0.0) {
        // Degenerate input: any positive λ yields the same empty graph.
        return vec![1e-3];
    }
    if points == 1 {
        return vec![lmax];
    }
    (0..points)
        .map(|i| lmax * floor_ratio.powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// Warm-started sweep over a strictly decreasing λ path, returning the
/// selected λ and its solution. BIC is n·(−logdet Θ̂ + tr(Σ̂Θ̂)) +
/// ln(n)·|edges|; ties keep the larger λ. `template` supplies solver
/// settings (its σ̂/λ fields are ignored, as in `solve_path`).
pub fn lambda_path_select(
    sigma_hat: &CovarianceMatrix,
    n: usize,
    lambdas: &[f64],
    criterion: PathCriterion,
    template: &GlassoProblem,
) -> Result<(f64, GraphEstimate)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "path selection needs n ≥ 2 for the fit term, got {n}"
        )));
    }
    let estimates = solve_path(sigma_hat, lambdas, template)?;
    let mut best: Option<(f64, usize)> = None;
    for (k, est) in estimates.iter().enumerate() {
        let score = match criterion {
            PathCriterion::Bic => {
                let chol = est
                    .theta_hat
                    .as_matrix()
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::NotPositiveDefinite("BIC needs Θ̂ ≻ 0".into()))?;
                let logdet: f64 =
                    chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
                let trace = (sigma_hat.as_matrix() * est.theta_hat.as_matrix()).trace();
                let nf = n as f64;
                nf * (-logdet + trace) + nf.ln() * est.edges.len() as f64
            }
            PathCriterion::FixedTarget { edges } => {
                (est.edges.len() as f64 - edges as f64).abs()
            }
        };
        match best {
            // Strict improvement only: ties keep the earlier (larger) λ.
            Some((s, _)) if score >= s => {}
            _ => best = Some((score, k)),
        }
    }
    let (_, k) = best.expect("nonempty path yields at least one estimate");
    Ok((lambdas[k], estimates[k].clone()))
}

/// Orientation of a samples CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    SamplesAsRows,
    SamplesAsCols,
}

/// Ingestion settings for [`ingest_sample_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    pub orientation: Orientation,
    /// Which batch kind the file claims to hold (direct observations of X
    /// vs sensed Y).
    pub kind: BatchKind,
    /// Skip one header line before the data.
    pub has_header: bool,
    /// Center each coordinate to mean 0 and scale to unit sample standard
    /// deviation (n−1 denominator).
    pub standardize: bool,
}

/// Reads a rectangular numeric CSV of samples into a batch, optionally
/// transposing and standardizing per coordinate.
pub fn ingest_sample_csv(path: &Path, opts: &IngestOptions) -> Result<SampleBatch> {
    let batch = crate::io::read_batch_csv(path, opts.kind, opts.has_header)?;
    let batch = match opts.orientation {
        Orientation::SamplesAsRows => batch,
        Orientation::SamplesAsCols => {
            let data = batch.data().transpose();
            SampleBatch::new(data, opts.kind)?
        }
    };
    if !opts.standardize {
        return Ok(batch);
    }
    let (p, n) = (batch.dim(), batch.n());
    if n < 2 {
        return Err(Error::InvalidArgument(
            "standardization needs at least 2 samples".into(),
        ));
    }
    let mut data = batch.data().clone();
    for i in 0..p {
        let mean = data.row(i).sum() / n as f64;
        let var = data
            .row(i)
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        if !(var > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {i} has zero variance; cannot standardize"
            )));
        }
        let sd = var.sqrt();
        for s in 0..n {
            data[(i, s)] = (data[(i, s)] - mean) / sd;
        }
    }
    SampleBatch::new(data, opts.kind)
}

/// The scored portion of a successful trial.
struct TrialScore {
    lambda: f64,
    metrics: RecoveryMetrics,
    converged: bool,
    predicted_edges: usize,
}

fn glasso_template(cfg: &ExperimentConfig, sigma_hat: &CovarianceMatrix) -> Result<GlassoProblem> {
    let mut t = GlassoProblem::new(sigma_hat.clone(), 0.0)?;
    t.tol = cfg.glasso_tol;
    t.support_tol = cfg.support_tol;
    Ok(t)
}

/// Runs the configured pipeline once and scores it against the truth.
/// Per-trial master draws at the grid maxima. Every grid cell uses a
/// prefix slice of these (common random numbers): the first d rows of A
/// and W, the first n samples of X, and W scaled by the cell's σ. Cell
/// marginals are unchanged — a prefix of i.i.d. draws is an i.i.d. draw —
/// but adjacent cells within a trial share their randomness, which makes
/// the monotone-trend comparisons sharp at small trial counts.
struct MasterDraws {
    /// p × n_max latent samples with the configured marginal.
    x_full: SampleBatch,
    /// d_max × p sensing matrix.
    a_full: DMatrix<f64>,
    /// d_max × n_max standard normal noise (unscaled).
    w_full: DMatrix<f64>,
}

fn draw_masters(cfg: &ExperimentConfig, truth: &GroundTruth, trial: usize) -> Result<MasterDraws> {
    let n_max = *cfg.ns.iter().max().expect("validated nonempty");
    let d_max = *cfg.ds.iter().max().expect("validated nonempty");
    let base = RngSeed(cfg.seed).derive(trial as u64);
    // Stream indices 1/2/3 for X/A/W, as recorded in the result schema.
    let x_full = nonparanormal_samples(&truth.sigma, cfg.marginal, n_max, base.derive(1))?;
    let a_full = make_sensing_matrix(d_max, cfg.p, base.derive(2))?;
    let w_full = crate::synth::standard_normal_matrix(d_max, n_max, &mut base.derive(3).rng());
    Ok(MasterDraws {
        x_full,
        a_full,
        w_full,
    })
}

/// Assembles one cell's observation batch from the master draws:
/// Y = A[..d] · X[..n] + σ·W[..d, ..n].
fn cell_observations(
    masters: &MasterDraws,
    n: usize,
    d: usize,
    sigma2: f64,
) -> Result<(SensingSystem, SampleBatch)> {
    let a = masters.a_full.rows(0, d).into_owned();
    let sys = SensingSystem::new(a, sigma2)?;
    let x = masters.x_full.data().columns(0, n);
    let mut y = sys.matrix() * x;
    let sigma = sigma2.sqrt();
    if sigma > 0.0 {
        for s in 0..n {
            for i in 0..d {
                y[(i, s)] += sigma * masters.w_full[(i, s)];
            }
        }
    }
    Ok((sys, SampleBatch::new(y, BatchKind::ObservedY)?))
}

/// Runs the configured estimator chain on one cell's observations and
/// scores the solved graph against the truth.
fn estimate_and_score(
    cfg: &ExperimentConfig,
    truth: &GroundTruth,
    truth_edges: &EdgeSet,
    theory: Option<&TheoryReport>,
    sys: &SensingSystem,
    y: &SampleBatch,
) -> Result<TrialScore> {
    let p = cfg.p;
    let n = y.n();
    let d = sys.d();
    let sigma2 = sys.sigma2();

    // Estimator chain → covariance for the graphical lasso.
    let sigma_hat: CovarianceMatrix = match cfg.pipeline {
        PipelineKind::Parametric => refined_covariance(y, sys)?.sigma_hat,
        PipelineKind::Nonparametric => {
            let xhat = least_squares_reconstruct(y, sys)?;
            let noise = noise_moments(sys)?;
            let gamma =
                default_gamma(n, p, d, sigma2, DEFAULT_A, cfg.gamma_c0)?.max(GAMMA_FLOOR);
            let dcfg = DeconvConfig::new(
                DEFAULT_A,
                gamma,
                DEFAULT_ALPHA,
                cfg.quad_tol,
                TailPolicy::KernelDeath,
            )?;
            let delta = cfg.delta.resolve(n, d, p)?;
            let (raw, _diags) = npn_pipeline_covariance(&xhat, &noise, &dcfg, delta)?;
            psd_repair(&raw, crate::glasso::DEFAULT_PSD_FLOOR)?
        }
        PipelineKind::BaselineDirect => {
            if d < p {
                return Err(Error::InvalidArgument(format!(
                    "the direct baseline needs d ≥ p (got d={d}, p={p}); skipped"
                )));
            }
            // First p coordinates of Y treated as if they were X.
            let mut direct = DMatrix::zeros(p, n);
            for i in 0..p {
                for s in 0..n {
                    direct[(i, s)] = y.data()[(i, s)];
                }
            }
            let pseudo = SampleBatch::new(direct, BatchKind::ReconstructedXhat)?;
            // Naive reading: no reconstruction-noise model to correct with.
            let no_noise = NoiseModel::new(0.0, d.max(p + 1), p)?;
            let delta = cfg.delta.resolve(n, d.max(p + 1), p)?;
            let raw = rank_transform_covariance(&pseudo, &no_noise, delta)?;
            psd_repair(&raw, crate::glasso::DEFAULT_PSD_FLOOR)?
        }
        PipelineKind::BaselineLsNoDeconv => {
            let xhat = least_squares_reconstruct(y, sys)?;
            let noise = noise_moments(sys)?;
            let delta = cfg.delta.resolve(n, d, p)?;
            let raw = rank_transform_covariance(&xhat, &noise, delta)?;
            psd_repair(&raw, crate::glasso::DEFAULT_PSD_FLOOR)?
        }
    };

    // λ policy → solved graph.
    let template = glasso_template(cfg, &sigma_hat)?;
    let (lambda, estimate) = match &cfg.lambda {
        LambdaPolicy::Fixed { value } => {
            let mut problem = template.clone();
            problem.lambda = *value;
            (*value, solve(&problem)?)
        }
        LambdaPolicy::ParamRule { scale } => {
            let report = theory.ok_or_else(|| {
                Error::InvalidArgument(
                    "the parametric λ rule needs the theory report (p exceeds the \
                     Fisher ceiling)"
                        .into(),
                )
            })?;
            let tau = tau_infinity(&truth.sigma, n, d, p, sigma2, &TauConstants::default())?;
            let lambda = scale * lambda_param_rule(tau, report.theta_irr)?;
            let mut problem = template.clone();
            problem.lambda = lambda;
            (lambda, solve(&problem)?)
        }
        LambdaPolicy::NonparamRule { c0 } => {
            let report = theory.ok_or_else(|| {
                Error::InvalidArgument(
                    "the nonparametric λ rule needs the theory report (p exceeds \
                     the Fisher ceiling)"
                        .into(),
                )
            })?;
            let beta = beta_exponent(DEFAULT_A, DEFAULT_ALPHA);
            let lambda = lambda_nonparam_rule(n, d, p, beta, report.theta_irr, *c0)?;
            let mut problem = template.clone();
            problem.lambda = lambda;
            (lambda, solve(&problem)?)
        }
        LambdaPolicy::PathSweep { lambdas, criterion } => {
            let path = if lambdas.is_empty() {
                auto_lambda_path_with(&sigma_hat, cfg.path_points, cfg.path_floor_ratio)
            } else {
                lambdas.clone()
            };
            lambda_path_select(&sigma_hat, n, &path, *criterion, &template)?
        }
    };

    let metrics = recall_precision(truth_edges, &estimate.edges)?;
    Ok(TrialScore {
        lambda,
        metrics,
        converged: estimate.converged,
        predicted_edges: estimate.edges.len(),
    })
}

/// Runs the full grid. Trials execute in parallel; each trial derives its
/// own seed streams from the master seed by trial index, so the result is
/// identical at any thread count. Within a trial, all grid cells share
/// the trial's master draws by prefix slicing (common random numbers).
/// Failed cells degrade their summaries but never abort the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let start = Instant::now();

    let GraphSpec::Band { rho1, rho2 } = cfg.graph;
    let truth = band_ground_truth(cfg.p, rho1, rho2, true)?;
    let truth_edges = support_and_signs(&truth.theta, 1e-12)?;
    let theory = if cfg.p <= DEFAULT_FISHER_CEILING {
        Some(irrepresentable_report(&truth.theta)?)
    } else {
        None
    };

    // Cell order: σ² outermost, then d, then n (innermost sweeps match the
    // monotone-trend reading of the tables).
    let mut cells_keys = Vec::new();
    for &sigma2 in &cfg.sigma2s {
        for &d in &cfg.ds {
            for &n in &cfg.ns {
                cells_keys.push((n, d, sigma2));
            }
        }
    }
    let trials = cfg.trials;

    // One job per trial, returning its records for every cell in order.
    let per_trial: Vec<Vec<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed_index = trial as u64;
            let masters = match draw_masters(cfg, &truth, trial) {
                Ok(m) => m,
                Err(e) => {
                    // Master generation failed: every cell inherits the error.
                    return cells_keys
                        .iter()
                        .map(|&(n, d, sigma2)| TrialRecord {
                            n,
                            d,
                            sigma2,
                            trial,
                            seed_index,
                            lambda: None,
                            recall: None,
                            precision: None,
                            sign_consistent: None,
                            predicted_edges: None,
                            converged: None,
                            error: Some(e.to_string()),
                        })
                        .collect();
                }
            };
            cells_keys
                .iter()
                .map(|&(n, d, sigma2)| {
                    let outcome = cell_observations(&masters, n, d, sigma2).and_then(
                        |(sys, y)| {
                            estimate_and_score(
                                cfg,
                                &truth,
                                &truth_edges,
                                theory.as_ref(),
                                &sys,
                                &y,
                            )
                        },
                    );
                    match outcome {
                        Ok(score) => TrialRecord {
                            n,
                            d,
                            sigma2,
                            trial,
                            seed_index,
                            lambda: Some(score.lambda),
                            recall: Some(score.metrics.recall),
                            precision: Some(score.metrics.precision),
                            sign_consistent: Some(score.metrics.sign_consistent),
                            predicted_edges: Some(score.predicted_edges),
                            converged: Some(score.converged),
                            error: None,
                        },
                        Err(e) => TrialRecord {
                            n,
                            d,
                            sigma2,
                            trial,
                            seed_index,
                            lambda: None,
                            recall: None,
                            precision: None,
                            sign_consistent: None,
                            predicted_edges: None,
                            converged: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect()
        })
        .collect();

    // Flatten to the stable cell-major, trial-minor order of the schema.
    let mut records = Vec::with_capacity(cells_keys.len() * trials);
    for cell_idx in 0..cells_keys.len() {
        for trial_records in &per_trial {
            records.push(trial_records[cell_idx].clone());
        }
    }

    let mut cells = Vec::with_capacity(cells_keys.len());
    for (cell_idx, &(n, d, sigma2)) in cells_keys.iter().enumerate() {
        let cell_records = &records[cell_idx * trials..(cell_idx + 1) * trials];
        let ok: Vec<&TrialRecord> =
            cell_records.iter().filter(|r| r.error.is_none()).collect();
        let failed = trials - ok.len();
        let stats = |f: fn(&TrialRecord) -> Option<f64>| -> (Option<f64>, Option<f64>) {
            if ok.is_empty() {
                return (None, None);
            }
            let vals: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd = if vals.len() > 1 {
                (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
                    / (vals.len() - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            (Some(m), Some(sd))
        };
        let (mean_recall, sd_recall) = stats(|r| r.recall);
        let (mean_precision, sd_precision) = stats(|r| r.precision);
        let sign_consistency_rate = if ok.is_empty() {
            None
        } else {
            Some(
                ok.iter()
                    .filter(|r| r.sign_consistent == Some(true))
                    .count() as f64
                    / ok.len() as f64,
            )
        };
        cells.push(CellSummary {
            n,
            d,
            sigma2,
            trials_ok: ok.len(),
            trials_failed: failed,
            degraded: failed > 0,
            mean_recall,
            sd_recall,
            mean_precision,
            sd_precision,
            sign_consistency_rate,
            theory,
        });
    }

    let total = start.elapsed().as_secs_f64();
    Ok(ExperimentResult {
        schema: SCHEMA_VERSION.to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        config_hash: cfg.content_hash()?,
        config: cfg.clone(),
        cells,
        trials: records,
        // Per-cell wall times are not tracked separately under the shared
        // parallel pool; the vector mirrors the cells array.
        timing: Some(TimingStats {
            total_seconds: total,
            cell_seconds: vec![f64::NAN; cells_keys.len()],
        }),
    })
}

/// Cell-level CSV mirroring the synthetic-study table layout.
pub fn cells_to_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(
        "# cell summaries\nn,d,sigma2,trials_ok,trials_failed,degraded,mean_recall,\
         sd_recall,mean_precision,sd_precision,sign_consistency_rate\n",
    );
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for c in &result.cells {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.n,
            c.d,
            c.sigma2,
            c.trials_ok,
            c.trials_failed,
            c.degraded,
            fmt(c.mean_recall),
            fmt(c.sd_recall),
            fmt(c.mean_precision),
            fmt(c.sd_precision),
            fmt(c.sign_consistency_rate),
        ));
    }
    s
}

/// Raw per-trial CSV.
pub fn trials_to_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(
        "# per-trial records\nn,d,sigma2,trial,seed_index,lambda,recall,precision,\
         sign_consistent,predicted_edges,converged,error\n",
    );
    let fnum = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &result.trials {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.d,
            r.sigma2,
            r.trial,
            r.seed_index,
            fnum(r.lambda),
            fnum(r.recall),
            fnum(r.precision),
            r.sign_consistent.map(|b| b.to_string()).unwrap_or_default(),
            r.predicted_edges.map(|v| v.to_string()).unwrap_or_default(),
            r.converged.map(|b| b.to_string()).unwrap_or_default(),
            r.error
                .as_deref()
                .map(|e| format!("\"{}\"", e.replace('"', "'")))
                .unwrap_or_default(),
        ));
    }
    s
}
