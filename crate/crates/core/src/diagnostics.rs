//! Theory-side diagnostics for support recovery: the Fisher matrix
//! Γ = Σ ⊗ Σ, the irrepresentable condition and its margin θ, the
//! curvature constants κ_Σ and κ_Γ, and edge-selection recall/precision.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    degree_max, matrix_norm, CovarianceMatrix, EdgeSet, MatrixNorm, PrecisionMatrix,
};

/// Largest p for which the p²×p² Fisher matrix is materialized by default.
pub const DEFAULT_FISHER_CEILING: usize = 60;

/// Support entries of Θ are those with |Θ_ij| > this tolerance.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Which index pairs form the "support" block of the Fisher matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupportConvention {
    /// Off-diagonal support pairs plus all diagonal pairs (i,i). This is
    /// the default: without the diagonal pairs the support block is
    /// frequently singular.
    AugmentDiagonal,
    /// Strictly the off-diagonal support pairs.
    StrictOffDiagonal,
}

/// Static quantities of a ground-truth precision matrix that govern
/// support recovery: the margin θ of the irrepresentable condition, the
/// curvature constants, and the maximum column sparsity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    /// κ_Σ = ‖Σ‖_{∞,∞}, the max absolute row sum of the covariance.
    pub kappa_sigma: f64,
    /// κ_Γ = ‖(Γ_SS)⁻¹‖_{∞,∞}.
    pub kappa_gamma: f64,
    /// θ = 1 − ‖Γ_{S^cS}(Γ_SS)⁻¹‖_{1,1}; ≤ 0 when the condition fails.
    pub theta_irr: f64,
    /// Maximum number of nonzero entries in any column of Θ (diagonal
    /// included).
    pub deg: usize,
    /// Equivalent to theta_irr > 0.
    pub irrepresentable_holds: bool,
}

/// Edge-selection quality of a predicted graph against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    /// |E_pred ∩ E_true| / |E_true|; 1 when the truth is empty.
    pub recall: f64,
    /// |E_pred ∩ E_true| / |E_pred|; 1 when the prediction is empty.
    pub precision: f64,
    /// True iff the edge sets are identical and every edge carried by both
    /// sets has the same sign (edges without recorded signs don't object).
    pub sign_consistent: bool,
    /// |E_true|.
    pub true_edges: usize,
    /// |E_pred|.
    pub predicted_edges: usize,
}

/// Fisher information matrix Γ = Σ ⊗ Σ, a p²×p² matrix with
/// Γ_{(i,j),(k,l)} = Σ_ik·Σ_jl under the flattening (i,j) ↦ i·p + j.
/// Refuses p above [`DEFAULT_FISHER_CEILING`].
pub fn fisher_matrix(sigma: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    fisher_matrix_with_ceiling(sigma, DEFAULT_FISHER_CEILING)
}

/// [`fisher_matrix`] with an explicit dimension ceiling.
pub fn fisher_matrix_with_ceiling(
    sigma: &CovarianceMatrix,
    ceiling: usize,
) -> Result<DMatrix<f64>> {
    let p = sigma.dim();
    if p > ceiling {
        return Err(Error::InvalidArgument(format!(
            "the Fisher matrix is p²×p²; refusing p = {p} above the ceiling {ceiling}"
        )));
    }
    Ok(sigma.as_matrix().kronecker(sigma.as_matrix()))
}

/// Flattened Fisher-matrix indices of the support of Θ under the given
/// convention: ordered pairs (i,j), i ≠ j, with |Θ_ij| > tol, plus the
/// diagonal pairs when augmenting. Sorted ascending.
fn support_indices(theta: &DMatrix<f64>, convention: SupportConvention) -> Vec<usize> {
    let p = theta.nrows();
    let mut idx = Vec::new();
    for i in 0..p {
        for j in 0..p {
            let keep = if i == j {
                convention == SupportConvention::AugmentDiagonal
            } else {
                theta[(i, j)].abs() > SUPPORT_TOL
            };
            if keep {
                idx.push(i * p + j);
            }
        }
    }
    idx
}

/// Diagnostics of the irrepresentable condition for a ground-truth
/// precision matrix, using the diagonal-augmented support convention and
/// the default Fisher ceiling.
pub fn irrepresentable_report(theta: &PrecisionMatrix) -> Result<TheoryReport> {
    irrepresentable_report_with(theta, SupportConvention::AugmentDiagonal, DEFAULT_FISHER_CEILING)
}

/// [`irrepresentable_report`] with explicit support convention and ceiling.
pub fn irrepresentable_report_with(
    theta: &PrecisionMatrix,
    convention: SupportConvention,
    ceiling: usize,
) -> Result<TheoryReport> {
    let sigma = theta.to_covariance()?;
    let gamma = fisher_matrix_with_ceiling(&sigma, ceiling)?;
    let p = sigma.dim();
    let support = support_indices(theta.as_matrix(), convention);
    let in_support: Vec<bool> = {
        let mut mask = vec![false; p * p];
        for &k in &support {
            mask[k] = true;
        }
        mask
    };
    let complement: Vec<usize> = (0..p * p).filter(|&k| !in_support[k]).collect();

    let s = support.len();
    let mut gamma_ss = DMatrix::zeros(s, s);
    for (r, &kr) in support.iter().enumerate() {
        for (c, &kc) in support.iter().enumerate() {
            gamma_ss[(r, c)] = gamma[(kr, kc)];
        }
    }
    let mut gamma_cs = DMatrix::zeros(complement.len(), s);
    for (r, &kr) in complement.iter().enumerate() {
        for (c, &kc) in support.iter().enumerate() {
            gamma_cs[(r, c)] = gamma[(kr, kc)];
        }
    }

    // Γ_SS is a principal submatrix of the PD matrix Σ⊗Σ, so Cholesky
    // succeeds unless it is numerically singular.
    let chol = gamma_ss.clone().cholesky().ok_or_else(|| {
        Error::Singular(format!(
            "the {s}×{s} support block of the Fisher matrix is not invertible"
        ))
    })?;
    let gamma_ss_inv = chol.inverse();
    let kappa_gamma = if s == 0 {
        0.0
    } else {
        matrix_norm(&gamma_ss_inv, MatrixNorm::InfInf)?
    };
    // ‖Γ_{S^cS}(Γ_SS)⁻¹‖_{1,1} via the solve form: the (1,1) norm (max
    // column sum) of M equals the (∞,∞) norm of Mᵀ = (Γ_SS)⁻¹ Γ_{S^cS}ᵀ.
    let cross_norm = if s == 0 || complement.is_empty() {
        0.0
    } else {
        let mt = chol.solve(&gamma_cs.transpose());
        matrix_norm(&mt, MatrixNorm::InfInf)?
    };
    let theta_irr = 1.0 - cross_norm;
    Ok(TheoryReport {
        kappa_sigma: matrix_norm(sigma.as_matrix(), MatrixNorm::InfInf)?,
        kappa_gamma,
        theta_irr,
        deg: degree_max(theta, SUPPORT_TOL)?,
        irrepresentable_holds: theta_irr > 0.0,
    })
}

/// Recall and precision of a predicted edge set against the truth, with
/// the exact-sign-recovery flag.
pub fn recall_precision(e_true: &EdgeSet, e_pred: &EdgeSet) -> Result<RecoveryMetrics> {
    if e_true.p() != e_pred.p() {
        return Err(Error::Dimension(format!(
            "edge sets live on different vertex counts: {} vs {}",
            e_true.p(),
            e_pred.p()
        )));
    }
    let shared = e_true.iter().filter(|&(i, j)| e_pred.contains(i, j)).count();
    let recall = if e_true.is_empty() {
        1.0
    } else {
        shared as f64 / e_true.len() as f64
    };
    let precision = if e_pred.is_empty() {
        1.0
    } else {
        shared as f64 / e_pred.len() as f64
    };
    let same_support = e_true.len() == e_pred.len() && shared == e_true.len();
    let signs_agree = e_true.iter().all(|(i, j)| {
        match (e_true.sign(i, j), e_pred.sign(i, j)) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    });
    Ok(RecoveryMetrics {
        recall,
        precision,
        sign_consistent: same_support && signs_agree,
        true_edges: e_true.len(),
        predicted_edges: e_pred.len(),
    })
}

