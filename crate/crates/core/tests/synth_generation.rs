//! Tests for ground-truth construction and sample generation: band precision
//! matrices (with closed-form eigenvalue oracle), Gaussian and nonparanormal
//! sampling (with a Spearman rank-correlation oracle), and the sensing
//! channel.

mod common;

use common::{mean_and_se, spearman, TestRng};
use covgraph::model::{BatchKind, CovarianceMatrix, SampleBatch, SensingSystem};
use covgraph::synth::{
    band_ground_truth, gauss_mixture4_cdf, gauss_mixture4_quantile, gaussian_samples,
    make_band_precision, make_sensing_matrix, nonparanormal_samples, sense, MarginalSpec, RngSeed,
};
use covgraph::Error;
use nalgebra::{dmatrix, DMatrix};

// ------------------------------------------------------ band precision

#[test]
fn band_p4_is_tridiagonal_with_stated_values() {
    let theta = make_band_precision(4, 1.0, 0.4).unwrap();
    let m = theta.as_matrix();
    for i in 0..4usize {
        for j in 0..4usize {
            let want = if i == j {
                1.0
            } else if i.abs_diff(j) == 1 {
                0.4
            } else {
                0.0
            };
            assert_eq!(m[(i, j)], want, "entry ({i},{j})");
        }
    }
}

#[test]
fn band_with_zero_coupling_is_scaled_identity() {
    let theta = make_band_precision(5, 2.5, 0.0).unwrap();
    assert_eq!(theta.as_matrix(), &(DMatrix::identity(5, 5) * 2.5));
}

#[test]
fn band_eigenvalues_match_closed_form() {
    // Tridiagonal Toeplitz eigenvalues: rho1 + 2·rho2·cos(kπ/(p+1)), k=1..p.
    let p = 3;
    let theta = make_band_precision(p, 1.0, 0.6).unwrap();
    let mut got: Vec<f64> = nalgebra::SymmetricEigen::new(theta.as_matrix().clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut want: Vec<f64> = (1..=p)
        .map(|k| 1.0 + 2.0 * 0.6 * (k as f64 * std::f64::consts::PI / (p as f64 + 1.0)).cos())
        .collect();
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-10, "eigenvalue {g} vs closed form {w}");
    }
}

#[test]
fn band_rejects_indefinite_parameters() {
    // p=10, rho2=0.8: min eigenvalue 1 + 1.6·cos(10π/11) ≈ −0.535 < 0.
    assert!(matches!(
        make_band_precision(10, 1.0, 0.8),
        Err(Error::NotPositiveDefinite(_))
    ));
    assert!(make_band_precision(1, 1.0, 0.0).is_err());
}

#[test]
fn band_ground_truth_normalization_preserves_support_and_inverse_pair() {
    let gt = band_ground_truth(5, 1.0, 0.4, false).unwrap();
    let gtc = band_ground_truth(5, 1.0, 0.4, true).unwrap();
    // Unnormalized Σ does not have unit diagonal; normalized does, exactly.
    assert!((gt.sigma.as_matrix()[(0, 0)] - 1.0).abs() > 1e-3);
    for i in 0..5 {
        assert_eq!(gtc.sigma.as_matrix()[(i, i)], 1.0);
    }
    for (theta, sigma) in [(&gt.theta, &gt.sigma), (&gtc.theta, &gtc.sigma)] {
        let prod = theta.as_matrix() * sigma.as_matrix();
        assert!((prod - DMatrix::identity(5, 5)).amax() < 1e-10);
    }
    // Rescaling Θ → D^{1/2}ΘD^{1/2} keeps the band support and signs.
    let m = gtc.theta.as_matrix();
    for i in 0..5usize {
        for j in 0..5usize {
            if i.abs_diff(j) == 1 {
                assert!(m[(i, j)] > 0.0);
            } else if i != j {
                assert!(m[(i, j)].abs() < 1e-12);
            }
        }
    }
}

// --------------------------------------------------- gaussian sampling

#[test]
fn gaussian_identity_sample_covariance_concentrates() {
    let n = 100_000;
    let x = gaussian_samples(&CovarianceMatrix::identity(4), n, RngSeed(11)).unwrap();
    let s = x.data() * x.data().transpose() / n as f64;
    let tol = 5.0 / (n as f64).sqrt();
    assert!(
        (s - DMatrix::identity(4, 4)).amax() < tol,
        "sample covariance off by more than {tol}"
    );
}

#[test]
fn gaussian_sampling_shapes_and_determinism() {
    let sigma = CovarianceMatrix::identity(3);
    let one = gaussian_samples(&sigma, 1, RngSeed(5)).unwrap();
    assert_eq!((one.dim(), one.n()), (3, 1));
    assert_eq!(one.kind(), BatchKind::LatentX);
    assert!(gaussian_samples(&sigma, 0, RngSeed(5)).is_err());

    let a = gaussian_samples(&sigma, 50, RngSeed(42)).unwrap();
    let b = gaussian_samples(&sigma, 50, RngSeed(42)).unwrap();
    assert_eq!(a.data(), b.data(), "same seed must reproduce bit for bit");
    let c = gaussian_samples(&sigma, 50, RngSeed(43)).unwrap();
    assert_ne!(a.data(), c.data());
}

#[test]
fn gaussian_sampling_rejects_indefinite_covariance() {
    let sigma = CovarianceMatrix::new(dmatrix![1.0, 2.0; 2.0, 1.0]).unwrap();
    assert!(matches!(
        gaussian_samples(&sigma, 10, RngSeed(0)),
        Err(Error::NotPositiveDefinite(_))
    ));
}

// ----------------------------------------------- nonparanormal margins

#[test]
fn gaussian_identity_marginal_is_the_identity_transform() {
    let sigma = CovarianceMatrix::identity(3);
    let a = nonparanormal_samples(&sigma, MarginalSpec::GaussianIdentity, 40, RngSeed(9)).unwrap();
    let b = gaussian_samples(&sigma, 40, RngSeed(9)).unwrap();
    assert_eq!(a.data(), b.data());
}

#[test]
fn uniform_marginal_means_and_range() {
    let n = 100_000;
    let sigma = CovarianceMatrix::identity(2);
    let x = nonparanormal_samples(&sigma, MarginalSpec::Uniform01, n, RngSeed(21)).unwrap();
    for i in 0..2 {
        let coord = x.coordinate(i);
        assert!(coord.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let (mean, _) = mean_and_se(&coord);
        assert!((mean - 0.5).abs() < 0.01, "coordinate {i} mean {mean}");
    }
}

#[test]
fn exponential_marginal_is_nonnegative_with_unit_mean() {
    let n = 100_000;
    let sigma = CovarianceMatrix::identity(2);
    let x = nonparanormal_samples(&sigma, MarginalSpec::ExponentialRate1, n, RngSeed(33)).unwrap();
    let coord = x.coordinate(0);
    assert!(coord.iter().all(|&v| v >= 0.0 && v.is_finite()));
    let (mean, se) = mean_and_se(&coord);
    assert!((mean - 1.0).abs() < 3.0 * se.max(0.005), "mean {mean} (se {se})");
}

#[test]
fn nonparanormal_requires_unit_diagonal() {
    let sigma = CovarianceMatrix::new(dmatrix![2.0, 0.0; 0.0, 2.0]).unwrap();
    assert!(nonparanormal_samples(&sigma, MarginalSpec::Uniform01, 10, RngSeed(0)).is_err());
}

#[test]
fn mixture_quantile_inverts_mixture_cdf() {
    for &u in &[1e-3, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999] {
        let x = gauss_mixture4_quantile(u);
        assert!(
            (gauss_mixture4_cdf(x) - u).abs() < 1e-9,
            "CDF(Q({u})) = {}",
            gauss_mixture4_cdf(x)
        );
    }
    // The mixture is symmetric about 0, so the median is 0.
    assert!(gauss_mixture4_quantile(0.5).abs() < 1e-9);
    assert!(gauss_mixture4_quantile(0.25) < gauss_mixture4_quantile(0.75));
}

#[test]
fn mixture_sample_moments_match_analytic_values() {
    // mean 0; variance 0.25·Σμ² + 0.01 = 0.16625.
    let n = 100_000;
    let sigma = CovarianceMatrix::identity(2);
    let x = nonparanormal_samples(&sigma, MarginalSpec::GaussMixture4, n, RngSeed(55)).unwrap();
    let coord = x.coordinate(1);
    let (mean, _) = mean_and_se(&coord);
    assert!(mean.abs() < 0.005, "mixture mean {mean}");
    let var = coord.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    assert!((var - 0.16625).abs() < 0.003, "mixture variance {var}");
}

#[test]
fn spearman_correlation_matches_gaussian_copula_oracle() {
    // For any monotone marginal transform, Spearman's ρ_s of a Gaussian
    // copula with correlation ρ converges to (6/π)·asin(ρ/2).
    let n = 100_000;
    let rho: f64 = 0.5;
    let sigma = CovarianceMatrix::new(dmatrix![1.0, rho; rho, 1.0]).unwrap();
    let oracle = 6.0 / std::f64::consts::PI * (rho / 2.0).asin();
    for (k, marg) in [
        MarginalSpec::GaussianIdentity,
        MarginalSpec::Uniform01,
        MarginalSpec::ExponentialRate1,
        MarginalSpec::GaussMixture4,
    ]
    .into_iter()
    .enumerate()
    {
        let x = nonparanormal_samples(&sigma, marg, n, RngSeed(100 + k as u64)).unwrap();
        let rs = spearman(&x.coordinate(0), &x.coordinate(1));
        assert!(
            (rs - oracle).abs() < 0.03,
            "{marg:?}: Spearman {rs} vs oracle {oracle}"
        );
    }
}

// -------------------------------------------------------- sensing channel

#[test]
fn identity_sensing_without_noise_is_exact() {
    let x = gaussian_samples(&CovarianceMatrix::identity(3), 20, RngSeed(1)).unwrap();
    let sys = SensingSystem::new(DMatrix::identity(3, 3), 0.0).unwrap();
    let y = sense(&x, &sys, RngSeed(2)).unwrap();
    assert_eq!(y.kind(), BatchKind::ObservedY);
    assert_eq!(y.data(), x.data());
    // σ² = 0 consumes no noise stream: the seed is irrelevant.
    let y2 = sense(&x, &sys, RngSeed(999)).unwrap();
    assert_eq!(y.data(), y2.data());
}

#[test]
fn pure_noise_channel_has_unit_variance() {
    let n = 10_000;
    let x = gaussian_samples(&CovarianceMatrix::identity(2), n, RngSeed(3)).unwrap();
    let sys = SensingSystem::new(DMatrix::zeros(3, 2), 1.0).unwrap();
    let y = sense(&x, &sys, RngSeed(4)).unwrap();
    let se = (2.0 / (n as f64 - 1.0)).sqrt(); // s.e. of a variance estimate
    for i in 0..3 {
        let coord = y.coordinate(i);
        let (mean, _) = mean_and_se(&coord);
        let var = coord.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var - 1.0).abs() < 3.0 * se, "coordinate {i} variance {var}");
    }
}

#[test]
fn projection_sensing_picks_coordinates() {
    let data = dmatrix![1.0, 4.0; 2.0, 5.0; 3.0, 6.0]; // p=3, n=2
    let x = SampleBatch::new(data, BatchKind::LatentX).unwrap();
    let a = dmatrix![1.0, 0.0, 0.0; 0.0, 1.0, 0.0];
    let sys = SensingSystem::new(a, 0.0).unwrap();
    let y = sense(&x, &sys, RngSeed(0)).unwrap();
    assert_eq!(y.data(), &dmatrix![1.0, 4.0; 2.0, 5.0]);
}

#[test]
fn sensing_is_linear_in_the_latent_batch() {
    let mut rng = TestRng(0xAB);
    let x1 = rng.matrix(3, 5);
    let x2 = rng.matrix(3, 5);
    let (a, b) = (2.5, -1.25);
    let sys = SensingSystem::new(rng.matrix(4, 3), 0.0).unwrap();
    let seed = RngSeed(0);
    let batch = |m: &DMatrix<f64>| SampleBatch::new(m.clone(), BatchKind::LatentX).unwrap();
    let lhs = sense(&batch(&(&x1 * a + &x2 * b)), &sys, seed).unwrap();
    let y1 = sense(&batch(&x1), &sys, seed).unwrap();
    let y2 = sense(&batch(&x2), &sys, seed).unwrap();
    let rhs = y1.data() * a + y2.data() * b;
    assert!((lhs.data() - rhs).amax() < 1e-12);
}

#[test]
fn sensing_rejects_dimension_mismatch() {
    let x = gaussian_samples(&CovarianceMatrix::identity(3), 5, RngSeed(1)).unwrap();
    let sys = SensingSystem::new(DMatrix::identity(4, 4), 0.0).unwrap();
    assert!(matches!(sense(&x, &sys, RngSeed(0)), Err(Error::Dimension(_))));
}

// ----------------------------------------------------- sensing matrices

#[test]
fn sensing_matrix_entries_are_standard_normal_scale() {
    let a = make_sensing_matrix(1000, 1, RngSeed(77)).unwrap();
    let norm2_per_d = a.column(0).norm_squared() / 1000.0;
    // ‖column‖²/d ~ χ²_d/d: s.e. √(2/d) ≈ 0.0447.
    assert!((norm2_per_d - 1.0).abs() < 3.0 * (2.0f64 / 1000.0).sqrt());
}

#[test]
fn sensing_matrix_shape_and_determinism() {
    let a = make_sensing_matrix(3, 2, RngSeed(8)).unwrap();
    assert_eq!((a.nrows(), a.ncols()), (3, 2));
    assert_eq!(a, make_sensing_matrix(3, 2, RngSeed(8)).unwrap());
    assert!(make_sensing_matrix(0, 2, RngSeed(8)).is_err());
}

// ------------------------------------------------------------ seeds

#[test]
fn derived_seeds_are_deterministic_and_distinct() {
    let base = RngSeed(123);
    let seeds: Vec<u64> = (0..100).map(|i| base.derive(i).0).collect();
    let mut unique = seeds.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(unique.len(), seeds.len(), "sub-stream collision");
    assert_eq!(base.derive(7), RngSeed(123).derive(7));
    assert_ne!(base.derive(0).0, base.0);
}
