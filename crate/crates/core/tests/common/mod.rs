//! Shared helpers for the integration-test suites. Everything here is
//! deliberately independent of the library's own numerics where it serves as
//! an oracle (separate RNG, separate norm/eigen computations).

#![allow(dead_code)]

use nalgebra::DMatrix;

/// A tiny SplitMix64-based generator so oracle tests don't consume the
/// library's RNG streams.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller (independent of the library's ziggurat).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn matrix(&mut self, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| self.normal())
    }
}

/// Largest singular value by power iteration on MᵀM — the oracle for the
/// operator norm.
pub fn operator_norm_power_iteration(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let n = gram.nrows();
    let mut v = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let w = &gram * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = w / norm;
        let new_lambda = (next.transpose() * &gram * &next)[(0, 0)];
        let done = (new_lambda - lambda).abs() <= 1e-15 * new_lambda.abs().max(1.0);
        v = next;
        lambda = new_lambda;
        if done {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

/// Random symmetric positive-definite matrix with unit diagonal.
pub fn random_correlation(p: usize, rng: &mut TestRng) -> DMatrix<f64> {
    let b = rng.matrix(p, p + 2);
    let mut s = &b * b.transpose();
    // Ridge for safe conditioning, then normalize to unit diagonal.
    for i in 0..p {
        s[(i, i)] += 0.5 * (p as f64);
    }
    let d: Vec<f64> = (0..p).map(|i| s[(i, i)].sqrt()).collect();
    for i in 0..p {
        for j in 0..p {
            s[(i, j)] /= d[i] * d[j];
        }
    }
    for i in 0..p {
        s[(i, i)] = 1.0;
    }
    (s.clone() + s.transpose()) * 0.5
}

/// Spearman rank correlation (no tie handling: inputs are continuous).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let ranks = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    };
    pearson(&ranks(x), &ranks(y))
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Adaptive Simpson quadrature — an independent oracle for one-dimensional
/// integrals of smooth (possibly oscillatory, absolutely integrable)
/// functions.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    // Pre-split into enough panels that oscillations are resolved before the
    // adaptive error estimate is trusted.
    let panels = (((b - a).abs() / std::f64::consts::PI).ceil() as usize).clamp(1, 4096);
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + (b - a) * k as f64 / panels as f64;
        let hi = a + (b - a) * (k + 1) as f64 / panels as f64;
        let (flo, fhi) = (f(lo), f(hi));
        let (whole, m, fm) = simpson(f, lo, flo, hi, fhi);
        total += recurse(
            f,
            lo,
            flo,
            hi,
            fhi,
            whole,
            m,
            fm,
            tol / panels as f64,
            40,
        );
    }
    total
}

/// Mean and standard error of the mean across a slice.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
