//! Parametric covariance estimation from compressed observations (Stage I of
//! the Gaussian pipeline), plus the τ∞ deviation diagnostic.
//!
//! Three estimators share one bilinear core, the Gram matrix Aᵀ(n⁻¹ΣYYᵀ)A:
//!
//! * `naive_covariance` — the raw plug-in Ãᵀ(n⁻¹ΣYYᵀ)Ã with Ã = A/√d;
//! * `bias_corrected_covariance` — rescales and shifts the diagonal so the
//!   whole matrix is unbiased for Σ♮ (for unit-variance coordinates);
//! * `refined_covariance` — keeps only the (rescaled, unbiased) off-diagonal
//!   block and pins the diagonal, which drops the two noisiest bias terms.
//!
//! # Channel parametrizations
//!
//! The sensing channel can be written Y = A·X + W with A_ij ~ N(0,1) ("raw",
//! what `synth::sense` generates) or Ỹ = Ã·X + W̃ with Ã = A/√d ("normalized",
//! the variance-matched form in which the mean analysis is naturally stated);
//! the two differ by a √d rescale of the observation and noise. Each mean
//! statement below names its parametrization:
//!
//! * naive, normalized channel: E = (1+1/d)·Σ♮ + (tr Σ♮/d)·I + σ²·I;
//! * bias-corrected, normalized channel: E = Σ♮;
//! * refined off-diagonals, **raw** channel: E = Σ♮_off — the pipeline path.
//!
//! Scaling note: the published main-text estimator carries a 1/(d+1) factor
//! with raw N(0,1) entries of A, while its derivation uses d/(d+1) with the
//! normalized Ã = A/√d — those differ by a factor d. This module follows the
//! derivation (equivalently c = 1/(d(d+1)) on the raw-A Gram core), the
//! convention under which the Monte Carlo unbiasedness checks in the test
//! suite pass on raw-channel data.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{CovarianceMatrix, SampleBatch, SensingSystem};

/// How the refined estimator fills its diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagPolicy {
    /// Diagonal pinned to exactly 1 (assumes Var(X_i) = 1).
    FixedToOne,
    /// Diagonal taken from the bias-corrected estimator, for ground truths
    /// whose variances are not 1.
    BiasCorrectedDiag,
}

/// Result of `refined_covariance`: the estimate plus the scaling constant
/// applied to the off-diagonal Gram block and the diagonal policy used.
#[derive(Debug, Clone)]
pub struct ParamCovEstimate {
    pub sigma_hat: CovarianceMatrix,
    /// Factor c in Σ̂ = diag + c·[Aᵀ(n⁻¹ΣYYᵀ)A]_off for raw A; equals 1/(d(d+1)).
    pub scaling_constant: f64,
    pub diag_policy: DiagPolicy,
}

fn check_dims(y: &SampleBatch, sys: &SensingSystem) -> Result<()> {
    if y.dim() != sys.d() {
        return Err(Error::Dimension(format!(
            "observation dimension {} does not match sensing rows {}",
            y.dim(),
            sys.d()
        )));
    }
    Ok(())
}

/// The p×p Gram core Aᵀ(n⁻¹ Σ_s Y YᵀS)A, computed as (1/n)·(AᵀY)(AᵀY)ᵀ so no
/// d×d intermediate is formed. Deterministic: one dense GEMM, no
/// order-dependent parallel reduction.
fn gram_core(y: &SampleBatch, sys: &SensingSystem) -> DMatrix<f64> {
    let m = sys.matrix().transpose() * y.data(); // p×n
    let n = y.n() as f64;
    let mut g = &m * m.transpose();
    g /= n;
    g
}

/// Naive estimator Ãᵀ(n⁻¹ΣYYᵀ)Ã with Ã = A/√d. Biased: under the
/// normalized channel its mean is (1+1/d)·Σ♮ + (tr Σ♮/d + σ²)·I (see the
/// module docs for the parametrization).
///
/// Returned as a plain symmetric matrix: degenerate batches legitimately
/// produce zero (or, after bias correction, negative) diagonals, which the
/// `CovarianceMatrix` invariants would reject.
pub fn naive_covariance(y: &SampleBatch, sys: &SensingSystem) -> Result<DMatrix<f64>> {
    check_dims(y, sys)?;
    Ok(gram_core(y, sys) / sys.d() as f64)
}

/// Bias-corrected estimator Σ̂ = d/(d+1)·naive − (p + d·σ²)/(d+1)·I, unbiased
/// for Σ♮ over the (A, X, W) ensemble under the normalized channel (module
/// docs); raw-channel observations should be rescaled Y → Y/√d, σ² → σ²/d
/// before using this diagonal.
pub fn bias_corrected_covariance(y: &SampleBatch, sys: &SensingSystem) -> Result<DMatrix<f64>> {
    check_dims(y, sys)?;
    let d = sys.d() as f64;
    let p = sys.p() as f64;
    let mut g = naive_covariance(y, sys)?;
    g *= d / (d + 1.0);
    let shift = (p + d * sys.sigma2()) / (d + 1.0);
    for i in 0..sys.p() {
        g[(i, i)] -= shift;
    }
    Ok(g)
}

/// Refined estimator (Stage I of the parametric pipeline):
/// Σ̂ = I + c·[Aᵀ(n⁻¹ΣYYᵀ)A]_off with c = 1/(d(d+1)), whose off-diagonal
/// block is unbiased for Σ♮'s under the raw channel Y = AX + W (the
/// `synth::sense` convention) and whose diagonal carries no estimation
/// noise.
pub fn refined_covariance(y: &SampleBatch, sys: &SensingSystem) -> Result<ParamCovEstimate> {
    refined_covariance_with(y, sys, DiagPolicy::FixedToOne)
}

/// `refined_covariance` with an explicit diagonal policy. The
/// `BiasCorrectedDiag` variant substitutes the bias-corrected diagonal for
/// ground truths with non-unit variances; it fails if that diagonal is not
/// strictly positive (too few samples to estimate the variances).
pub fn refined_covariance_with(
    y: &SampleBatch,
    sys: &SensingSystem,
    diag_policy: DiagPolicy,
) -> Result<ParamCovEstimate> {
    check_dims(y, sys)?;
    let d = sys.d() as f64;
    let c = 1.0 / (d * (d + 1.0));
    let mut g = gram_core(y, sys);
    g *= c;
    match diag_policy {
        DiagPolicy::FixedToOne => {
            for i in 0..sys.p() {
                g[(i, i)] = 1.0;
            }
        }
        DiagPolicy::BiasCorrectedDiag => {
            let bc = bias_corrected_covariance(y, sys)?;
            for i in 0..sys.p() {
                if bc[(i, i)] <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "bias-corrected variance estimate for coordinate {i} is {:.3e} ≤ 0",
                        bc[(i, i)]
                    )));
                }
                g[(i, i)] = bc[(i, i)];
            }
        }
    }
    Ok(ParamCovEstimate {
        sigma_hat: CovarianceMatrix::new(g)?,
        scaling_constant: c,
        diag_policy,
    })
}

/// The eight tunable constants of the τ∞ bound, defaulting to 1. c₂ appears
/// in both terms that carry the (1 + c₂·p/d) inflation factor; c₇ scales the
/// sample-coupling part of the noise term.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TauConstants(pub [f64; 8]);

impl Default for TauConstants {
    fn default() -> Self {
        TauConstants([1.0; 8])
    }
}

/// Evaluates the elementwise deviation bound τ∞ for the parametric estimator:
///
/// ```text
/// τ∞ = c₀·√(d·log p)/(d+1) · maxᵢ‖Σᵢ‖₂
///    + c₁·log p/(d+1) · (1 + c₂·p/d) · ‖Σ‖_{off,F}
///    + c₃·log p·√(dp) / (√n·(d+1))
///    + c₄·p·(log p)^{3/2} / (√n·(d+1)) · (1 + c₂·p/d)
///    + c₅·p·√(log p) / (√d·(d+1))
///    + c₆·σ²·log p/d · [1 + c₇·(√(d/n) ∨ d/n)]
/// ```
///
/// This is a diagnostic (the theory's constants are unknown, so the default
/// c_i = 1 gives scale information, not a certified bound); it never gates
/// estimation.
pub fn tau_infinity(
    sigma_true: &CovarianceMatrix,
    n: usize,
    d: usize,
    p: usize,
    sigma2: f64,
    constants: &TauConstants,
) -> Result<f64> {
    if p != sigma_true.dim() {
        return Err(Error::Dimension(format!(
            "p = {p} does not match Σ dimension {}",
            sigma_true.dim()
        )));
    }
    if p < 2 || d == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "τ∞ needs p ≥ 2, d ≥ 1, n ≥ 1; got p={p}, d={d}, n={n}"
        )));
    }
    if sigma2 < 0.0 || constants.0.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(
            "σ² must be ≥ 0 and constants finite".into(),
        ));
    }
    let c = &constants.0;
    let m = sigma_true.as_matrix();
    let (nf, df, pf) = (n as f64, d as f64, p as f64);
    let lp = pf.ln();

    let max_col_l2 = (0..p)
        .map(|j| m.column(j).norm())
        .fold(0.0f64, f64::max);
    let off_f = crate::model::matrix_norm(m, crate::model::MatrixNorm::OffFrobenius)?;
    let inflate = |ci: f64| 1.0 + ci * pf / df;

    let t1 = c[0] * (df * lp).sqrt() / (df + 1.0) * max_col_l2;
    let t2 = c[1] * lp / (df + 1.0) * inflate(c[2]) * off_f;
    let t3 = c[3] * lp * (df * pf).sqrt() / (nf.sqrt() * (df + 1.0));
    let t4 = c[4] * pf * lp.powf(1.5) / (nf.sqrt() * (df + 1.0)) * inflate(c[2]);
    let t5 = c[5] * pf * lp.sqrt() / (df.sqrt() * (df + 1.0));
    let t6 = c[6] * sigma2 * lp / df * (1.0 + c[7] * (df / nf).sqrt().max(df / nf));
    Ok(t1 + t2 + t3 + t4 + t5 + t6)
}
