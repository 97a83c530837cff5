//! Graphical lasso: minimize −logdet Θ + tr(Σ̂Θ) + λ‖Θ‖₁,off over Θ ≻ 0,
//! shared by the parametric and nonparametric pipelines, plus the λ selection
//! rules and the minimum-signal feasibility check.
//!
//! The solver is block coordinate descent on the dual (the classic scheme:
//! sweep columns of W = Θ̂⁻¹, each block solved by an inner coordinate-descent
//! lasso). Its correctness certificate is self-contained: a converged
//! solution must satisfy the stationarity system
//!
//! ```text
//! (Θ̂⁻¹)_ii = Σ̂_ii                          (no penalty on the diagonal)
//! (Θ̂⁻¹)_ij = Σ̂_ij + λ·sign(Θ̂_ij)           where Θ̂_ij ≠ 0, i ≠ j
//! |(Θ̂⁻¹)_ij − Σ̂_ij| ≤ λ                    where Θ̂_ij = 0, i ≠ j
//! ```
//!
//! and `kkt_residual` reports the worst violation, measured against the exact
//! Cholesky inverse of the returned Θ̂ rather than the solver's running dual
//! iterate, so the certificate is independent of the iteration bookkeeping.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{
    matrix_norm, support_and_signs, CovarianceMatrix, EdgeSet, MatrixNorm, PrecisionMatrix,
};

/// One penalized estimation problem. `sigma_hat` may be indefinite (both
/// pipelines can produce indefinite estimates); `solve` clips its spectrum at
/// `psd_floor` first, because the objective is unbounded below otherwise.
#[derive(Debug, Clone)]
pub struct GlassoProblem {
    pub sigma_hat: CovarianceMatrix,
    pub lambda: f64,
    /// Eigenvalue floor applied before solving.
    pub psd_floor: f64,
    /// Cap on full block sweeps.
    pub max_iter: usize,
    /// Convergence scale: sweeps stop once the max elementwise change of W
    /// over a sweep drops below tol·mean(|Σ̂_ii|) and the KKT residual is
    /// below 10·tol.
    pub tol: f64,
    /// |Θ̂_ij| threshold for reporting an edge.
    pub support_tol: f64,
}

pub const DEFAULT_PSD_FLOOR: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-6;

impl GlassoProblem {
    pub fn new(sigma_hat: CovarianceMatrix, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "λ must be finite and ≥ 0, got {lambda}"
            )));
        }
        Ok(Self {
            sigma_hat,
            lambda,
            psd_floor: DEFAULT_PSD_FLOOR,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            support_tol: DEFAULT_SUPPORT_TOL,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "λ must be finite and ≥ 0, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        if self.psd_floor < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "psd_floor must be ≥ 0, got {}",
                self.psd_floor
            )));
        }
        Ok(())
    }
}

/// A solved problem: the estimate, its dual, the edge read-out, and
/// convergence metadata.
#[derive(Debug, Clone)]
pub struct GraphEstimate {
    pub theta_hat: PrecisionMatrix,
    /// The dual variable W ≈ Θ̂⁻¹ maintained by the sweeps.
    pub w_hat: CovarianceMatrix,
    pub edges: EdgeSet,
    pub lambda_used: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max stationarity violation of the returned Θ̂ (see module docs).
    pub kkt_residual: f64,
    /// Whether the input Σ̂ needed its spectrum clipped before solving.
    pub psd_repaired: bool,
}

/// Clips the eigenvalues of a symmetric matrix at `floor` and reconstructs.
/// Inputs already satisfying λ_min ≥ floor pass through unchanged up to
/// eigendecomposition roundoff.
pub fn psd_repair(m: &DMatrix<f64>, floor: f64) -> Result<CovarianceMatrix> {
    if floor < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue floor must be ≥ 0, got {floor}"
        )));
    }
    if !m.is_square() || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "psd_repair needs a finite square matrix".into(),
        ));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().all(|&ev| ev >= floor) {
        return CovarianceMatrix::new(sym);
    }
    let mut vals = eig.eigenvalues;
    for v in vals.iter_mut() {
        if *v < floor {
            *v = floor;
        }
    }
    let q = eig.eigenvectors;
    let repaired = &q * DMatrix::from_diagonal(&vals) * q.transpose();
    CovarianceMatrix::new((&repaired + repaired.transpose()) * 0.5)
}

fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Internal solver state, reusable across a λ path for warm starts.
struct DualState {
    s: DMatrix<f64>,
    w: DMatrix<f64>,
    /// Column j holds the lasso coefficients β for block j (entry j is 0).
    b: DMatrix<f64>,
    psd_repaired: bool,
}

impl DualState {
    fn init(sigma: &CovarianceMatrix, floor: f64) -> Result<Self> {
        let repaired = psd_repair(sigma.as_matrix(), floor)?;
        let psd_repaired = {
            let diff = repaired.as_matrix() - sigma.as_matrix();
            diff.amax() > 1e-10 * sigma.as_matrix().amax().max(1.0)
        };
        let s = repaired.into_matrix();
        Ok(Self {
            w: s.clone(),
            b: DMatrix::zeros(s.nrows(), s.ncols()),
            s,
            psd_repaired,
        })
    }

    /// One full sweep over all blocks; returns the max elementwise change in W.
    fn sweep(&mut self, lambda: f64, inner_thresh: f64) -> f64 {
        let p = self.s.nrows();
        let mut max_delta = 0.0f64;
        let mut u = vec![0.0f64; p];
        for j in 0..p {
            // u = W·β for the current block's β (β_j ≡ 0), maintained
            // incrementally as coordinates move.
            for k in 0..p {
                let mut acc = 0.0;
                for l in 0..p {
                    acc += self.w[(k, l)] * self.b[(l, j)];
                }
                u[k] = acc;
            }
            // Inner coordinate-descent lasso:
            //   β_k ← soft(Σ̂_kj − Σ_{l≠k,j} W_kl β_l, λ) / W_kk.
            for _pass in 0..1000 {
                let mut inner_delta = 0.0f64;
                for k in 0..p {
                    if k == j {
                        continue;
                    }
                    let wkk = self.w[(k, k)];
                    let grad = u[k] - wkk * self.b[(k, j)];
                    let new = soft_threshold(self.s[(k, j)] - grad, lambda) / wkk;
                    let delta = new - self.b[(k, j)];
                    if delta != 0.0 {
                        self.b[(k, j)] = new;
                        for l in 0..p {
                            u[l] += delta * self.w[(l, k)];
                        }
                        inner_delta = inner_delta.max(delta.abs());
                    }
                }
                if inner_delta < inner_thresh {
                    break;
                }
            }
            // New off-diagonal column of W: w₁₂ = W₁₁·β = u (β_j = 0 keeps
            // column j of W out of the accumulation).
            for k in 0..p {
                if k == j {
                    continue;
                }
                let delta = (u[k] - self.w[(k, j)]).abs();
                if delta > max_delta {
                    max_delta = delta;
                }
                self.w[(k, j)] = u[k];
                self.w[(j, k)] = u[k];
            }
        }
        max_delta
    }

    /// Recovers Θ̂ from (W, B): θ_jj = 1/(W_jj − w₁₂ᵀβ), θ_·j = −β·θ_jj,
    /// symmetrized to absorb per-block roundoff drift.
    fn reconstruct_theta(&self) -> DMatrix<f64> {
        let p = self.s.nrows();
        let mut theta = DMatrix::zeros(p, p);
        for j in 0..p {
            let mut dot = 0.0;
            for k in 0..p {
                if k != j {
                    dot += self.w[(k, j)] * self.b[(k, j)];
                }
            }
            let tjj = 1.0 / (self.w[(j, j)] - dot);
            theta[(j, j)] = tjj;
            for k in 0..p {
                if k != j {
                    theta[(k, j)] = -self.b[(k, j)] * tjj;
                }
            }
        }
        let thetat = theta.transpose();
        (theta + thetat) * 0.5
    }
}

/// Max stationarity violation of `theta` for the problem (s, λ), measured
/// against the exact inverse `v` = Θ̂⁻¹.
fn kkt_residual_of(s: &DMatrix<f64>, v: &DMatrix<f64>, theta: &DMatrix<f64>, lambda: f64) -> f64 {
    let p = s.nrows();
    let zero_tol = 1e-9 * theta.amax().max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..p {
        worst = worst.max((v[(i, i)] - s[(i, i)]).abs());
        for j in 0..p {
            if i == j {
                continue;
            }
            let dev = v[(i, j)] - s[(i, j)];
            let viol = if theta[(i, j)].abs() <= zero_tol {
                (dev.abs() - lambda).max(0.0)
            } else {
                (dev - lambda * theta[(i, j)].signum()).abs()
            };
            worst = worst.max(viol);
        }
    }
    worst
}

fn finish(
    state: &DualState,
    problem: &GlassoProblem,
    iterations: usize,
    converged: bool,
    theta: DMatrix<f64>,
    kkt: f64,
) -> Result<GraphEstimate> {
    let theta_hat = PrecisionMatrix::new(theta)?;
    let edges = support_and_signs(&theta_hat, problem.support_tol)?;
    Ok(GraphEstimate {
        w_hat: CovarianceMatrix::new(state.w.clone())?,
        theta_hat,
        edges,
        lambda_used: problem.lambda,
        iterations,
        converged,
        kkt_residual: kkt,
        psd_repaired: state.psd_repaired,
    })
}

fn solve_on_state(state: &mut DualState, problem: &GlassoProblem) -> Result<GraphEstimate> {
    problem.validate()?;
    let p = state.s.nrows();
    let mean_diag = (0..p).map(|i| state.s[(i, i)].abs()).sum::<f64>() / p as f64;
    let thresh = problem.tol * mean_diag;
    let inner_thresh = 0.01 * thresh;
    let kkt_target = 10.0 * problem.tol;

    let mut last_theta: Option<(DMatrix<f64>, f64)> = None;
    for iter in 1..=problem.max_iter {
        let delta = state.sweep(problem.lambda, inner_thresh);
        if delta < thresh {
            // Cheap criterion met; now pay for the honest certificate.
            let theta = state.reconstruct_theta();
            let kkt = match theta.clone().cholesky() {
                Some(chol) => kkt_residual_of(&state.s, &chol.inverse(), &theta, problem.lambda),
                None => f64::INFINITY,
            };
            if kkt < kkt_target {
                return finish(state, problem, iter, true, theta, kkt);
            }
            last_theta = Some((theta, kkt));
        }
    }
    let (theta, kkt) = match last_theta {
        Some(tk) => tk,
        None => {
            let theta = state.reconstruct_theta();
            let kkt = match theta.clone().cholesky() {
                Some(chol) => kkt_residual_of(&state.s, &chol.inverse(), &theta, problem.lambda),
                None => f64::INFINITY,
            };
            (theta, kkt)
        }
    };
    finish(state, problem, problem.max_iter, false, theta, kkt)
}

/// Solves one graphical-lasso problem from a cold start.
pub fn solve(problem: &GlassoProblem) -> Result<GraphEstimate> {
    problem.validate()?;
    let mut state = DualState::init(&problem.sigma_hat, problem.psd_floor)?;
    solve_on_state(&mut state, problem)
}

/// Solves a strictly decreasing λ path with warm starts: each solution's dual
/// and lasso coefficients seed the next, which is both faster and the
/// standard way to trace a regularization path.
pub fn solve_path(
    sigma_hat: &CovarianceMatrix,
    lambdas: &[f64],
    template: &GlassoProblem,
) -> Result<Vec<GraphEstimate>> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty λ path".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "λ path must be strictly decreasing".into(),
        ));
    }
    let mut state = DualState::init(sigma_hat, template.psd_floor)?;
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let problem = GlassoProblem {
            sigma_hat: sigma_hat.clone(),
            lambda,
            ..template.clone()
        };
        out.push(solve_on_state(&mut state, &problem)?);
    }
    Ok(out)
}

/// The penalized objective −logdet Θ + tr(Σ̂Θ) + λ‖Θ‖₁,off. Errors if Θ is
/// not positive definite (logdet undefined).
pub fn objective(sigma_hat: &CovarianceMatrix, theta: &PrecisionMatrix, lambda: f64) -> Result<f64> {
    let chol = theta
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("objective needs Θ ≻ 0".into()))?;
    let logdet: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    let trace = (sigma_hat.as_matrix() * theta.as_matrix()).trace();
    let off = matrix_norm(theta.as_matrix(), MatrixNorm::OffL1)?;
    Ok(-logdet + trace + lambda * off)
}

/// λ rule for the parametric pipeline: λ = 8·τ∞/θ.
pub fn lambda_param_rule(tau_inf: f64, theta_irr: f64) -> Result<f64> {
    if !(theta_irr > 0.0 && theta_irr <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "irrepresentability constant θ must lie in (0, 1], got {theta_irr}"
        )));
    }
    if !(tau_inf >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "τ∞ must be ≥ 0, got {tau_inf}"
        )));
    }
    Ok(8.0 * tau_inf / theta_irr)
}

/// λ rule for the nonparametric pipeline:
/// λ = c₀·θ⁻¹·max(log n/n^{1/4}, log(d−p)/(d−p)^{β/4}).
pub fn lambda_nonparam_rule(
    n: usize,
    d: usize,
    p: usize,
    beta: f64,
    theta_irr: f64,
    c0: f64,
) -> Result<f64> {
    if d <= p {
        return Err(Error::InvalidArgument(format!(
            "nonparametric rule needs d > p, got d={d}, p={p}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n ≥ 2, got {n}")));
    }
    if !(theta_irr > 0.0 && theta_irr <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "irrepresentability constant θ must lie in (0, 1], got {theta_irr}"
        )));
    }
    if !(beta > 0.0 && beta.is_finite() && c0.is_finite() && c0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need β > 0 and c0 ≥ 0, got β={beta}, c0={c0}"
        )));
    }
    let nf = n as f64;
    let dp = (d - p) as f64;
    let sample_branch = nf.ln() / nf.powf(0.25);
    let dim_branch = dp.ln() / dp.powf(beta / 4.0);
    Ok(c0 / theta_irr * sample_branch.max(dim_branch))
}

/// Sign-consistency feasibility check of the parametric theorem: true iff
/// min_{(i,j)∈S} |Θ♮_ij| ≥ 2·κ_Γ·(1 + 8/θ)·τ∞. The minimum over an empty
/// support is +∞, so edgeless truths pass vacuously.
pub fn min_signal_check(
    theta_true: &PrecisionMatrix,
    tau_inf: f64,
    theta_irr: f64,
    kappa_gamma: f64,
) -> Result<bool> {
    if !(theta_irr > 0.0 && theta_irr <= 1.0) || !(tau_inf >= 0.0) || !(kappa_gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need θ ∈ (0,1], τ∞ ≥ 0, κ_Γ > 0; got θ={theta_irr}, τ∞={tau_inf}, κ_Γ={kappa_gamma}"
        )));
    }
    let m = theta_true.as_matrix();
    let mut min_signal = f64::INFINITY;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)] != 0.0 {
                min_signal = min_signal.min(m[(i, j)].abs());
            }
        }
    }
    let bound = 2.0 * kappa_gamma * (1.0 + 8.0 / theta_irr) * tau_inf;
    Ok(min_signal >= bound)
}
