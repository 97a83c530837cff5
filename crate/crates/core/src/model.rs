//! Foundational domain types shared by every estimator: covariance and
//! precision matrices, edge sets with signs, the linear sensing system
//! Y = AX + W, and batches of sample vectors.
//!
//! Matrices are stored dense (`nalgebra::DMatrix<f64>`); the dimensions this
//! crate targets top out in the low thousands, so sparse storage would buy
//! nothing. All types are immutable after construction and safe to share
//! across threads.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default absolute tolerance for floating-point comparisons when the caller
/// does not supply one.
pub const DEFAULT_TOL: f64 = 1e-8;

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{what} contains non-finite entries"
        )))
    }
}

/// Verifies near-symmetry (relative to the largest entry) and returns the
/// exactly symmetrized matrix (M + Mᵀ)/2 so downstream code never has to
/// worry about roundoff asymmetry.
fn symmetrize(m: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite(&m, what)?;
    let scale = m.amax().max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if worst > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!(
            "{what} is not symmetric: max |M_ij - M_ji| = {worst:.3e} (scale {scale:.3e})"
        )));
    }
    let mt = m.transpose();
    Ok((m + mt) * 0.5)
}

/// Symmetric p×p covariance matrix (Σ and its estimates).
///
/// Construction enforces symmetry to 1e-12 relative tolerance and strictly
/// positive diagonal entries; positive definiteness is *not* required here
/// (empirical estimates may be indefinite until repaired).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let m = symmetrize(m, "covariance matrix")?;
        if let Some(i) = (0..m.nrows()).find(|&i| m[(i, i)] <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "covariance diagonal entry ({i},{i}) = {} is not strictly positive",
                m[(i, i)]
            )));
        }
        Ok(Self { m })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            m: DMatrix::identity(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Rescales to a correlation matrix D^{-1/2} Σ D^{-1/2}; returns the new
    /// matrix together with the diagonal scales that were divided out.
    pub fn to_correlation(&self) -> (CovarianceMatrix, Vec<f64>) {
        let p = self.dim();
        let scales: Vec<f64> = (0..p).map(|i| self.m[(i, i)].sqrt()).collect();
        let mut c = self.m.clone();
        for i in 0..p {
            for j in 0..p {
                c[(i, j)] /= scales[i] * scales[j];
            }
        }
        // Exact ones on the diagonal, immune to sqrt roundoff.
        for i in 0..p {
            c[(i, i)] = 1.0;
        }
        (CovarianceMatrix { m: c }, scales)
    }
}

/// Symmetric p×p precision matrix (Θ and its estimates). Positive
/// definiteness is established where needed by factorization success, not
/// stored as a flag.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionMatrix {
    m: DMatrix<f64>,
}

impl PrecisionMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Ok(Self {
            m: symmetrize(m, "precision matrix")?,
        })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            m: DMatrix::identity(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Dense inverse via Cholesky; fails if Θ is not positive definite.
    pub fn to_covariance(&self) -> Result<CovarianceMatrix> {
        let chol = self
            .m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("precision matrix".into()))?;
        CovarianceMatrix::new(chol.inverse())
    }
}

/// Undirected edge set over vertices [0, p), optionally carrying the sign of
/// each precision-matrix entry. Pairs are stored with i < j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
    signs: Option<BTreeMap<(usize, usize), i8>>,
}

impl EdgeSet {
    pub fn new(p: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = BTreeSet::new();
        for (i, j) in pairs {
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {i}")));
            }
            if i >= p || j >= p {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i},{j}) out of range for p={p}"
                )));
            }
            edges.insert((i.min(j), i.max(j)));
        }
        Ok(Self {
            p,
            edges,
            signs: None,
        })
    }

    pub fn with_signs(
        p: usize,
        pairs: impl IntoIterator<Item = ((usize, usize), i8)>,
    ) -> Result<Self> {
        let mut edges = BTreeSet::new();
        let mut signs = BTreeMap::new();
        for ((i, j), s) in pairs {
            if i == j || i >= p || j >= p {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i},{j}) invalid for p={p}"
                )));
            }
            if s != 1 && s != -1 {
                return Err(Error::InvalidArgument(format!(
                    "sign for edge ({i},{j}) must be ±1, got {s}"
                )));
            }
            let key = (i.min(j), i.max(j));
            edges.insert(key);
            signs.insert(key, s);
        }
        Ok(Self {
            p,
            edges,
            signs: Some(signs),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn sign(&self, i: usize, j: usize) -> Option<i8> {
        self.signs
            .as_ref()
            .and_then(|s| s.get(&(i.min(j), i.max(j))).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Max vertex degree (number of incident edges; diagonal not counted).
    pub fn max_vertex_degree(&self) -> usize {
        let mut deg = vec![0usize; self.p];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

/// The sensing channel Y = AX + W: a d×p matrix A with raw N(0,1)-scale
/// entries and the noise variance σ² of W ~ N(0, σ²·I_d). Estimators that
/// assume the normalized Ã = A/√d convention document and apply that
/// rescaling internally.
#[derive(Debug, Clone)]
pub struct SensingSystem {
    a: DMatrix<f64>,
    sigma2: f64,
}

impl SensingSystem {
    pub fn new(a: DMatrix<f64>, sigma2: f64) -> Result<Self> {
        check_finite(&a, "sensing matrix")?;
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::Dimension("sensing matrix must be non-empty".into()));
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be finite and ≥ 0, got {sigma2}"
            )));
        }
        Ok(Self { a, sigma2 })
    }

    /// Observation dimension d (rows of A).
    pub fn d(&self) -> usize {
        self.a.nrows()
    }

    /// Signal dimension p (columns of A).
    pub fn p(&self) -> usize {
        self.a.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// What a batch of vectors represents in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchKind {
    LatentX,
    ObservedY,
    ReconstructedXhat,
}

impl BatchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BatchKind::LatentX => "latent_x",
            BatchKind::ObservedY => "observed_y",
            BatchKind::ReconstructedXhat => "reconstructed_xhat",
        }
    }
}

/// n sample vectors of a common dimension, stored as the columns of a dense
/// dim×n matrix (one column per sample, matching nalgebra's column-major
/// layout). CSV serialization writes samples as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    data: DMatrix<f64>,
    kind: BatchKind,
}

impl SampleBatch {
    pub fn new(data: DMatrix<f64>, kind: BatchKind) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "sample batch must contain at least one sample of positive dimension".into(),
            ));
        }
        check_finite(&data, "sample batch")?;
        Ok(Self { data, kind })
    }

    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn kind(&self) -> BatchKind {
        self.kind
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    /// One coordinate across all samples.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }
}

/// The matrix norms of §2's notation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixNorm {
    /// max_ij |M_ij|
    InfElementwise,
    /// Σ_{i≠j} |M_ij|
    OffL1,
    /// sqrt(Σ_{i≠j} M_ij²)
    OffFrobenius,
    /// max column absolute sum ‖M‖_{1,1}
    OneOne,
    /// max row absolute sum ‖M‖_{∞,∞}
    InfInf,
    /// largest singular value
    Operator,
    /// sqrt(Σ M_ij²)
    Frobenius,
}

pub fn matrix_norm(m: &DMatrix<f64>, which: MatrixNorm) -> Result<f64> {
    check_finite(m, "matrix")?;
    let val = match which {
        MatrixNorm::InfElementwise => m.amax(),
        MatrixNorm::OffL1 => {
            let mut s = 0.0;
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    if i != j {
                        s += m[(i, j)].abs();
                    }
                }
            }
            s
        }
        MatrixNorm::OffFrobenius => {
            let mut s = 0.0;
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    if i != j {
                        s += m[(i, j)] * m[(i, j)];
                    }
                }
            }
            s.sqrt()
        }
        MatrixNorm::OneOne => (0..m.ncols())
            .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        MatrixNorm::InfInf => (0..m.nrows())
            .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        MatrixNorm::Operator => {
            let svd = m.clone().svd(false, false);
            svd.singular_values.iter().copied().fold(0.0, f64::max)
        }
        MatrixNorm::Frobenius => m.iter().map(|v| v * v).sum::<f64>().sqrt(),
    };
    Ok(val)
}

/// Internal support extraction shared by `support_and_signs` and the
/// diagnostics module (which indexes supports of arbitrary square matrices).
pub(crate) fn support_of(m: &DMatrix<f64>, tol: f64) -> Vec<((usize, usize), i8)> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if m[(i, j)].abs() > tol {
                out.push(((i, j), if m[(i, j)] > 0.0 { 1 } else { -1 }));
            }
        }
    }
    out
}

/// Edge (i,j) is included iff |Θ_ij| > tol, i ≠ j; the sign of the entry is
/// recorded per edge.
pub fn support_and_signs(theta: &PrecisionMatrix, tol: f64) -> Result<EdgeSet> {
    if tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be ≥ 0, got {tol}"
        )));
    }
    EdgeSet::with_signs(theta.dim(), support_of(theta.as_matrix(), tol))
}

/// deg(Θ) = max_i ‖Θ_i‖₀: the largest number of entries with |Θ_ij| > tol in
/// any column, *including* the diagonal. Subtract 1 for the usual graph
/// degree when all diagonals are nonzero.
pub fn degree_max(theta: &PrecisionMatrix, tol: f64) -> Result<usize> {
    if tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be ≥ 0, got {tol}"
        )));
    }
    let m = theta.as_matrix();
    Ok((0..m.ncols())
        .map(|j| m.column(j).iter().filter(|v| v.abs() > tol).count())
        .max()
        .unwrap_or(0))
}
