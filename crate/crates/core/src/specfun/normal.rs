//! Standard normal density, distribution function and quantile.

use statrs::function::erf;

use crate::error::{Error, Result};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF without input validation. `NaN` propagates, `±∞` map to 1 and 0.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal CDF, rejecting non-finite input.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("std_normal_cdf: non-finite input {x}")));
    }
    Ok(norm_cdf(x))
}

/// Quantile of the standard normal distribution.
pub fn norm_ppf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("norm_ppf: probability {p} outside (0, 1)")));
    }
    let x = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    // One Halley step against the accurate CDF.
    let pdf = norm_pdf(x);
    if pdf <= 0.0 || !x.is_finite() {
        return Ok(x);
    }
    let u = (norm_cdf(x) - p) / pdf;
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// `ln Φ(x)`, accurate far into the lower tail.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x > -30.0 {
        norm_cdf(x).ln()
    } else {
        // Asymptotic Mills-ratio expansion; relative error below 1e-12 for x < -30.
        let x2 = x * x;
        let series = mills_series(x * x);
        -0.5 * x2 - (-x).ln() - LN_SQRT_2PI + series.ln()
    }
}

fn mills_series(x2: f64) -> f64 {
    let r = 1.0 / x2;
    1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)))
}

/// Inverse Mills ratio `φ(x) / Φ(x)`, stable for very negative `x`.
pub fn inv_mills(x: f64) -> f64 {
    if x > -30.0 {
        norm_pdf(x) / norm_cdf(x)
    } else {
        let series = mills_series(x * x);
        -x / series
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_points() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((norm_cdf(40.0) - 1.0).abs() <= 1e-15);
        assert_eq!(norm_cdf(f64::INFINITY), 1.0);
        assert_eq!(norm_cdf(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn cdf_is_symmetric() {
        for i in -800..=800 {
            let x = i as f64 * 0.01;
            assert!((norm_cdf(-x) - (1.0 - norm_cdf(x))).abs() <= 1e-15, "x = {x}");
        }
    }

    #[test]
    fn cdf_rejects_non_finite() {
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
        assert!(std_normal_cdf(0.3).is_ok());
    }

    #[test]
    fn ppf_inverts_cdf() {
        for &p in &[1e-10, 0.01, 0.25, 0.5, 0.75, 0.9, 1.0 - 1e-9] {
            let x = norm_ppf(p).unwrap();
            assert!((norm_cdf(x) - p).abs() < 1e-14 * p.max(1e-2), "p = {p}");
        }
        assert!((norm_ppf(0.75).unwrap() - 0.674_489_750_196_081_7).abs() < 1e-14);
        assert!(norm_ppf(0.0).is_err());
        assert!(norm_ppf(1.0).is_err());
    }

    #[test]
    fn log_cdf_is_continuous_at_switch() {
        let a = log_norm_cdf(-30.0 + 1e-12);
        let b = log_norm_cdf(-30.0 - 1e-12);
        assert!(((a - b) / a).abs() < 1e-10);
        let a = inv_mills(-30.0 + 1e-12);
        let b = inv_mills(-30.0 - 1e-12);
        assert!(((a - b) / a).abs() < 1e-10);
        // φ(-30)/Φ(-30) to 30 digits
        assert!((inv_mills(-30.0) - 30.033_259_667_433_677).abs() < 1e-9);
        assert!((log_norm_cdf(-30.0) + 454.321_243_956_343_2).abs() < 1e-9);
    }
}
