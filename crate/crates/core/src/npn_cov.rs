//! Nonparanormal covariance from reconstructed samples: per-coordinate
//! moment correction, the Gaussianizing transform
//! `ĥ_i(x) = m̂_i + v̂_i·Φ⁻¹(F̂ᵗʳ_i(x))`, and the covariance of the
//! transformed batch,
//!
//! ```text
//!     Σ̂ = (1/n) Σ_s (ĥ(X̂⁽ˢ⁾) − μ̂)(ĥ(X̂⁽ˢ⁾) − μ̂)ᵀ,
//!     μ̂ = (1/n) Σ_s ĥ(X̂⁽ˢ⁾),
//! ```
//!
//! plus the oracle covariance built from exact marginal transforms for
//! validation studies. The output feeds the graphical lasso.

use nalgebra::DMatrix;

use crate::deconv::{count_nonmonotone, DeconvConfig, MarginalCdfEstimate, NoiseModel};
use crate::error::{Error, Result};
use crate::model::{BatchKind, SampleBatch};
use crate::normal::normal_quantile;

/// Mean and noise-corrected standard deviation of one reconstructed
/// coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    /// Sample mean m̂.
    pub m_hat: f64,
    /// Corrected standard deviation
    /// v̂ = √max(0, s² − n/(n−1)·σ²/(d−p)) with s² the unbiased variance.
    pub v_hat: f64,
    /// Whether the noise correction exceeded the sample variance and v̂ was
    /// clamped at zero (small n or large noise).
    pub variance_clamped: bool,
}

/// Noise-corrected first and second moments of a reconstructed coordinate.
/// Requires n ≥ 2.
pub fn moment_estimates(column: &[f64], noise: &NoiseModel) -> Result<MomentEstimate> {
    let n = column.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "moment estimation requires at least 2 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let m_hat = column.iter().sum::<f64>() / nf;
    let s2 = column.iter().map(|&x| (x - m_hat) * (x - m_hat)).sum::<f64>() / (nf - 1.0);
    let corrected = s2 - nf / (nf - 1.0) * noise.approx_variance();
    if corrected < 0.0 {
        Ok(MomentEstimate {
            m_hat,
            v_hat: 0.0,
            variance_clamped: true,
        })
    } else {
        Ok(MomentEstimate {
            m_hat,
            v_hat: corrected.sqrt(),
            variance_clamped: false,
        })
    }
}

/// A fitted Gaussianizing transform for one coordinate:
/// ĥ(x) = m̂ + v̂·Φ⁻¹(F̂ᵗʳ(x)).
#[derive(Debug, Clone)]
pub struct TransformEstimate {
    m_hat: f64,
    v_hat: f64,
    variance_clamped: bool,
    cdf: MarginalCdfEstimate,
}

impl TransformEstimate {
    /// Fits the moments from the CDF estimator's own sample column.
    pub fn new(cdf: MarginalCdfEstimate) -> Result<Self> {
        let m = moment_estimates(cdf.samples(), cdf.noise())?;
        Ok(TransformEstimate {
            m_hat: m.m_hat,
            v_hat: m.v_hat,
            variance_clamped: m.variance_clamped,
            cdf,
        })
    }

    /// Sample mean m̂.
    pub fn m_hat(&self) -> f64 {
        self.m_hat
    }

    /// Noise-corrected standard deviation v̂.
    pub fn v_hat(&self) -> f64 {
        self.v_hat
    }

    /// Whether the variance correction was clamped at zero.
    pub fn variance_clamped(&self) -> bool {
        self.variance_clamped
    }

    /// The underlying marginal CDF estimator.
    pub fn cdf(&self) -> &MarginalCdfEstimate {
        &self.cdf
    }

    /// ĥ(x) = m̂ + v̂·Φ⁻¹(F̂ᵗʳ(x)); always finite because the truncated CDF
    /// stays inside [δ, 1−δ].
    pub fn apply(&self, x: f64) -> Result<f64> {
        let u = self.cdf.evaluate_truncated(x)?;
        Ok(self.m_hat + self.v_hat * normal_quantile(u)?)
    }

    /// Batched ĥ evaluation (shares quadrature work across the points).
    pub fn apply_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let us = self.cdf.evaluate_many_truncated(xs)?;
        us.into_iter()
            .map(|u| Ok(self.m_hat + self.v_hat * normal_quantile(u)?))
            .collect()
    }
}

/// Free-function form of [`TransformEstimate::apply`].
pub fn apply_transform(t: &TransformEstimate, x: f64) -> Result<f64> {
    t.apply(x)
}

/// Covariance (1/n normalizer) of an already-transformed sample matrix
/// (p×n, samples as columns), centered at the batch mean.
pub fn transformed_covariance(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (p, n) = h.shape();
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument(
            "covariance of an empty sample matrix is undefined".into(),
        ));
    }
    let nf = n as f64;
    let mut centered = h.clone();
    for i in 0..p {
        let mu = centered.row(i).sum() / nf;
        for s in 0..n {
            centered[(i, s)] -= mu;
        }
    }
    Ok(&centered * centered.transpose() / nf)
}

/// Nonparametric covariance estimate: applies each coordinate's fitted
/// transform to the reconstructed batch and takes the mean-centered Gram
/// matrix. Returns a plain matrix — it is exactly zero when every
/// transformed sample coincides (e.g. all variance corrections clamped).
pub fn npn_covariance(
    xhat: &SampleBatch,
    transforms: &[TransformEstimate],
) -> Result<DMatrix<f64>> {
    if xhat.kind() == BatchKind::ObservedY {
        return Err(Error::InvalidArgument(
            "nonparanormal covariance expects reconstructed (or latent) samples, \
             not raw observations — reconstruct first"
                .into(),
        ));
    }
    let p = xhat.dim();
    if transforms.len() != p {
        return Err(Error::Dimension(format!(
            "{} transforms supplied for a batch of dimension {p}",
            transforms.len()
        )));
    }
    let n = xhat.n();
    let mut h = DMatrix::zeros(p, n);
    for (i, t) in transforms.iter().enumerate() {
        if t.cdf().coordinate() != i {
            return Err(Error::InvalidArgument(format!(
                "transform at position {i} was fitted for coordinate {}",
                t.cdf().coordinate()
            )));
        }
        let col = xhat.coordinate(i);
        let vals = t.apply_many(&col)?;
        for (s, v) in vals.into_iter().enumerate() {
            h[(i, s)] = v;
        }
    }
    transformed_covariance(&h)
}

/// Oracle covariance for validation: applies exact marginal transforms
/// `h(i, x)` to a latent batch (Gaussian marginals make this the ordinary
/// empirical covariance).
pub fn oracle_npn_covariance<H>(x_batch: &SampleBatch, h: H) -> Result<DMatrix<f64>>
where
    H: Fn(usize, f64) -> f64,
{
    if x_batch.kind() != BatchKind::LatentX {
        return Err(Error::InvalidArgument(format!(
            "the oracle covariance is defined on latent samples, got {}",
            x_batch.kind().as_str()
        )));
    }
    let (p, n) = (x_batch.dim(), x_batch.n());
    let mut hm = DMatrix::zeros(p, n);
    for i in 0..p {
        for s in 0..n {
            hm[(i, s)] = h(i, x_batch.data()[(i, s)]);
        }
    }
    transformed_covariance(&hm)
}

/// Per-coordinate diagnostics emitted by the full nonparametric stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StageDiagnostics {
    /// Coordinate index.
    pub coordinate: usize,
    /// Whether the variance correction clamped v̂ at zero.
    pub variance_clamped: bool,
    /// Adjacent inversions of the raw CDF estimate over the coordinate's
    /// sorted sample column (the estimator is not monotonized).
    pub nonmonotone_pairs: usize,
}

/// Full nonparametric covariance stage: fit a marginal CDF estimator and a
/// Gaussianizing transform per coordinate, evaluate at the batch's own
/// sample points, and return the covariance of the transformed samples plus
/// per-coordinate diagnostics.
pub fn npn_pipeline_covariance(
    xhat: &SampleBatch,
    noise: &NoiseModel,
    cfg: &DeconvConfig,
    delta: f64,
) -> Result<(DMatrix<f64>, Vec<StageDiagnostics>)> {
    if xhat.kind() == BatchKind::ObservedY {
        return Err(Error::InvalidArgument(
            "nonparanormal covariance expects reconstructed (or latent) samples, \
             not raw observations — reconstruct first"
                .into(),
        ));
    }
    let (p, n) = (xhat.dim(), xhat.n());
    let mut h = DMatrix::zeros(p, n);
    let mut diagnostics = Vec::with_capacity(p);
    for i in 0..p {
        let cdf = MarginalCdfEstimate::from_batch(xhat, i, *noise, cfg.clone(), delta)?;
        let moments = moment_estimates(cdf.samples(), noise)?;
        let col = xhat.coordinate(i);
        // One quadrature pass: raw values feed both the transform (after
        // clamping) and the non-monotonicity diagnostic (in sorted-x order).
        let raw = cdf.evaluate_many(&col)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).unwrap());
        let sorted_raw: Vec<f64> = order.iter().map(|&s| raw[s]).collect();
        diagnostics.push(StageDiagnostics {
            coordinate: i,
            variance_clamped: moments.variance_clamped,
            nonmonotone_pairs: count_nonmonotone(&sorted_raw),
        });
        for (s, r) in raw.into_iter().enumerate() {
            let u = r.clamp(delta, 1.0 - delta);
            h[(i, s)] = moments.m_hat + moments.v_hat * normal_quantile(u)?;
        }
    }
    let sigma = transformed_covariance(&h)?;
    Ok((sigma, diagnostics))
}
