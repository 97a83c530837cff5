//! covgraph: conditional-independence graph recovery from indirect linear
//! observations Y = AX + W.
//!
//! The library implements two pipelines that both end in a graphical lasso:
//!
//! * **parametric** (Gaussian X): a debiased covariance estimator built from
//!   the Gram matrix of AᵀY, with the τ∞ deviation diagnostic and its λ rule;
//! * **nonparametric** (nonparanormal X): least-squares reconstruction of X,
//!   characteristic-function deconvolution of each marginal CDF, a Gaussian
//!   copula transform, and the covariance of the transformed samples.
//!
//! Supporting modules provide ground-truth synthesis for the benchmark
//! harness, theory-side diagnostics (irrepresentability, κ constants, Fisher
//! matrix), recovery metrics, and a reproducible experiment runner. The
//! `covgraph` binary exposes each stage as a subcommand.

pub mod deconv;
pub mod diagnostics;
pub mod error;
pub mod glasso;
pub mod harness;
pub mod io;
pub mod model;
pub mod normal;
pub mod npn_cov;
pub mod param_cov;
pub mod synth;

pub use error::{Error, Result};

/// Schema identifier stamped into JSON reports and printed by `--version`.
pub const SCHEMA_VERSION: &str = "covgraph/1";

pub use synth::RNG_ALGORITHM;
