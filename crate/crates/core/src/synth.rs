//! Synthetic ground truth and sample generation: the band-graph precision
//! matrix, Gaussian and nonparanormal sampling, and the sensing channel
//! Y = AX + W.
//!
//! # Reproducibility
//!
//! All randomness flows through ChaCha8 (a counter-based stream cipher RNG)
//! seeded with a caller-supplied 64-bit value via `seed_from_u64`. Sub-streams
//! (e.g. per-trial seeds in the experiment harness) are derived with a
//! SplitMix64 mix of (seed, index), so batches for different indices can be
//! generated in parallel and still reproduce bit for bit regardless of
//! scheduling. Identical seed + identical parameters → bit-identical output.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{BatchKind, CovarianceMatrix, PrecisionMatrix, SampleBatch, SensingSystem};
use crate::normal::std_normal_cdf;

/// Opaque 64-bit RNG seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derives an independent sub-seed for stream `index` (SplitMix64 finalizer
    /// over seed + (index+1)·golden-gamma). Used for per-trial streams.
    pub fn derive(self, index: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }

    pub(crate) fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Identifier string for the RNG scheme, printed by `--version` and recorded
/// in experiment results.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64+splitmix64-streams";

/// Marginal distribution applied coordinate-wise to the Gaussian copula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalSpec {
    /// No transform: X = Z.
    GaussianIdentity,
    /// Uniform on [0, 1].
    Uniform01,
    /// Exponential with rate 1.
    ExponentialRate1,
    /// Equal-weight mixture of N(μ, 10⁻²) with μ ∈ {±0.25, ±0.5}.
    GaussMixture4,
}

const MIX_MEANS: [f64; 4] = [-0.5, -0.25, 0.25, 0.5];
const MIX_SD: f64 = 0.1;

/// CDF of the four-component Gaussian mixture marginal.
pub fn gauss_mixture4_cdf(x: f64) -> f64 {
    MIX_MEANS
        .iter()
        .map(|&mu| std_normal_cdf((x - mu) / MIX_SD))
        .sum::<f64>()
        * 0.25
}

/// Quantile of the mixture by bisection on the analytic CDF, to 1e-12.
pub fn gauss_mixture4_quantile(u: f64) -> f64 {
    let u = u.clamp(1e-300, 1.0 - 1e-16);
    let (mut lo, mut hi) = (-1.5f64, 1.5f64);
    while gauss_mixture4_cdf(lo) > u {
        lo *= 2.0;
    }
    while gauss_mixture4_cdf(hi) < u {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if gauss_mixture4_cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Builds the band precision matrix: Θ_ii = rho1, Θ_ij = rho2 for |i−j| = 1,
/// zero elsewhere. Positive definiteness is verified by Cholesky.
pub fn make_band_precision(p: usize, rho1: f64, rho2: f64) -> Result<PrecisionMatrix> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "band graph needs p ≥ 2, got {p}"
        )));
    }
    if !rho1.is_finite() || !rho2.is_finite() {
        return Err(Error::InvalidArgument(
            "band parameters must be finite".into(),
        ));
    }
    let mut m = DMatrix::zeros(p, p);
    for i in 0..p {
        m[(i, i)] = rho1;
        if i + 1 < p {
            m[(i, i + 1)] = rho2;
            m[(i + 1, i)] = rho2;
        }
    }
    if m.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite(format!(
            "band precision with rho1={rho1}, rho2={rho2}, p={p}"
        )));
    }
    PrecisionMatrix::new(m)
}

/// A ground-truth pair (Θ, Σ = Θ⁻¹).
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub theta: PrecisionMatrix,
    pub sigma: CovarianceMatrix,
}

/// Band ground truth with optional rescaling of Σ to a correlation matrix.
///
/// The band Σ = Θ⁻¹ does not have unit diagonal; sampling pipelines that
/// assume Var(X_i) = 1 (the nonparanormal copula, and the parametric
/// estimator whose diagonal is pinned to 1) set `normalize_to_correlation`.
/// The rescaling Θ → D^{1/2} Θ D^{1/2} preserves the support and signs, so
/// the recovered graph is comparable either way.
pub fn band_ground_truth(
    p: usize,
    rho1: f64,
    rho2: f64,
    normalize_to_correlation: bool,
) -> Result<GroundTruth> {
    let theta = make_band_precision(p, rho1, rho2)?;
    let sigma = theta.to_covariance()?;
    if !normalize_to_correlation {
        return Ok(GroundTruth { theta, sigma });
    }
    let (sigma_c, scales) = sigma.to_correlation();
    let mut t = theta.into_matrix();
    for i in 0..p {
        for j in 0..p {
            t[(i, j)] *= scales[i] * scales[j];
        }
    }
    Ok(GroundTruth {
        theta: PrecisionMatrix::new(t)?,
        sigma: sigma_c,
    })
}

/// Fills a p×n matrix with standard normal draws, column by column (one
/// column per sample), in a fixed traversal order for determinism.
pub(crate) fn standard_normal_matrix(p: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(p, n);
    for s in 0..n {
        for i in 0..p {
            z[(i, s)] = rng.sample(StandardNormal);
        }
    }
    z
}

/// Draws n i.i.d. samples of X ~ N(0, Σ) via the lower Cholesky factor.
pub fn gaussian_samples(sigma: &CovarianceMatrix, n: usize, seed: RngSeed) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::InvalidArgument("need n ≥ 1 samples".into()));
    }
    let chol = sigma
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("sampling covariance".into()))?;
    let mut rng = seed.rng();
    let z = standard_normal_matrix(sigma.dim(), n, &mut rng);
    SampleBatch::new(chol.l() * z, BatchKind::LatentX)
}

/// Draws n nonparanormal samples: Z ~ N(0, Σ) with unit-diagonal Σ, then
/// X_i = Q(Φ(Z_i)) coordinate-wise with Q the marginal quantile function.
/// The copula — hence the conditional-independence graph — is that of Σ.
pub fn nonparanormal_samples(
    sigma: &CovarianceMatrix,
    marg: MarginalSpec,
    n: usize,
    seed: RngSeed,
) -> Result<SampleBatch> {
    if marg == MarginalSpec::GaussianIdentity {
        return gaussian_samples(sigma, n, seed);
    }
    let p = sigma.dim();
    for i in 0..p {
        if (sigma.as_matrix()[(i, i)] - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "nonparanormal sampling requires unit diagonal; Σ[{i},{i}] = {}",
                sigma.as_matrix()[(i, i)]
            )));
        }
    }
    let z = gaussian_samples(sigma, n, seed)?;
    let mut x = z.into_data();
    for v in x.iter_mut() {
        let zi = *v;
        *v = match marg {
            MarginalSpec::GaussianIdentity => unreachable!(),
            MarginalSpec::Uniform01 => std_normal_cdf(zi),
            // Q(u) = −ln(1−u) with 1−Φ(z) evaluated as the survival function,
            // so deep right tails don't collapse to u = 1.
            MarginalSpec::ExponentialRate1 => -crate::normal::std_normal_sf(zi).ln(),
            MarginalSpec::GaussMixture4 => gauss_mixture4_quantile(std_normal_cdf(zi)),
        };
    }
    SampleBatch::new(x, BatchKind::LatentX)
}

/// Passes a latent batch through the channel: Y^(s) = A·X^(s) + W^(s) with
/// W ~ N(0, σ²·I_d). No noise stream is consumed when σ² = 0.
pub fn sense(x: &SampleBatch, sys: &SensingSystem, seed: RngSeed) -> Result<SampleBatch> {
    if x.dim() != sys.p() {
        return Err(Error::Dimension(format!(
            "sample dimension {} does not match sensing columns {}",
            x.dim(),
            sys.p()
        )));
    }
    let mut y = sys.matrix() * x.data();
    if sys.sigma2() > 0.0 {
        let sd = sys.sigma2().sqrt();
        let mut rng = seed.rng();
        let w = standard_normal_matrix(sys.d(), x.n(), &mut rng);
        y += w * sd;
    }
    SampleBatch::new(y, BatchKind::ObservedY)
}

/// Draws the d×p sensing matrix with i.i.d. standard normal entries (the raw
/// A convention; estimators rescale to Ã = A/√d internally where needed).
pub fn make_sensing_matrix(d: usize, p: usize, seed: RngSeed) -> Result<DMatrix<f64>> {
    if d == 0 || p == 0 {
        return Err(Error::InvalidArgument(format!(
            "sensing matrix needs d ≥ 1 and p ≥ 1, got d={d}, p={p}"
        )));
    }
    let mut rng = seed.rng();
    Ok(standard_normal_matrix(d, p, &mut rng))
}
