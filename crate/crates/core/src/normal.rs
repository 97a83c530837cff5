//! Standard-normal CDF, density, and quantile.
//!
//! Φ is computed through the complementary error function (`libm::erfc`),
//! which stays accurate deep into the tails where `1 - Φ(x)` would cancel.
//! Φ⁻¹ uses a rational initial approximation (Acklam's coefficients, ~1e-9
//! relative accuracy) refined by one Halley step against the erfc-based Φ,
//! which lands the round trip Φ(Φ⁻¹(u)) = u well below 1e-9 over the whole
//! open unit interval.

use crate::error::{Error, Result};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.5066282746310002;

/// Φ(x), the standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// 1 − Φ(x) without cancellation for large x.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// φ(x), the standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

// Acklam's rational approximation coefficients for the inverse normal CDF.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

fn acklam_initial(u: f64) -> f64 {
    const U_LOW: f64 = 0.02425;
    if u < U_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - U_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Φ⁻¹(u) for u in the open interval (0, 1).
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "normal quantile requires 0 < u < 1, got {u}"
        )));
    }
    let x = acklam_initial(u);
    // One Halley refinement of f(x) = Φ(x) − u.
    let err = std_normal_cdf(x) - u;
    let step = err * SQRT_2PI * (0.5 * x * x).exp();
    Ok(x - step / (1.0 + 0.5 * x * step))
}
