//! Standard bivariate normal distribution function.
//!
//! Genz's refinement of the Drezner–Wesolowsky method: for `|ρ| < 0.925` the
//! integral over the correlation (via `asin ρ`) is evaluated by Gauss–Legendre
//! with 6, 12 or 20 nodes by `|ρ|` band; above that the singular part is
//! subtracted analytically and the remainder integrated with 20 nodes.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::normal::{norm_cdf, norm_pdf};
use super::quadrature::{gauss_legendre, Rule};
use crate::error::{Error, Result};

/// Correlations this close to ±1 use the exact degenerate forms.
const SINGULAR_RHO: f64 = 1.0 - 1e-12;

/// A validated correlation coefficient, `|ρ| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BvnCorrelation(f64);

impl BvnCorrelation {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_nan() || rho.abs() > 1.0 {
            return Err(Error::domain(format!("correlation {rho} outside [-1, 1]")));
        }
        Ok(Self(rho))
    }

    /// Clamps into `[-1, 1]`. `NaN` maps to 0.
    pub fn saturating(rho: f64) -> Self {
        if rho.is_nan() {
            Self(0.0)
        } else {
            Self(rho.clamp(-1.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for BvnCorrelation {
    type Error = Error;

    fn try_from(rho: f64) -> Result<Self> {
        Self::new(rho)
    }
}

impl From<BvnCorrelation> for f64 {
    fn from(rho: BvnCorrelation) -> f64 {
        rho.0
    }
}

struct Rules {
    small: Rule,
    medium: Rule,
    large: Rule,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules {
        small: gauss_legendre(6),
        medium: gauss_legendre(12),
        large: gauss_legendre(20),
    })
}

/// `P(X ≤ x, Y ≤ y)` for standard normals with correlation `rho`.
pub fn bvn_cdf(x: f64, y: f64, rho: BvnCorrelation) -> f64 {
    bvn_upper(-x, -y, rho.0)
}

/// `∂/∂x P(X ≤ x, Y ≤ y) = φ(x) Φ((y − ρx) / √(1 − ρ²))`.
pub fn bvn_cdf_dx(x: f64, y: f64, rho: BvnCorrelation) -> f64 {
    let r = rho.0;
    let s2 = (1.0 - r) * (1.0 + r);
    if s2 <= 0.0 {
        // Degenerate: Y = ±X.
        return if r > 0.0 {
            if x <= y {
                norm_pdf(x)
            } else {
                0.0
            }
        } else if x >= -y {
            norm_pdf(x)
        } else {
            0.0
        };
    }
    norm_pdf(x) * norm_cdf((y - r * x) / s2.sqrt())
}

/// `∂/∂y P(X ≤ x, Y ≤ y)`.
pub fn bvn_cdf_dy(x: f64, y: f64, rho: BvnCorrelation) -> f64 {
    bvn_cdf_dx(y, x, rho)
}

// P(X > h, Y > k).
fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h.is_nan() || k.is_nan() {
        return f64::NAN;
    }
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return norm_cdf(-k);
    }
    if k == f64::NEG_INFINITY {
        return norm_cdf(-h);
    }
    if r == 0.0 {
        return norm_cdf(-h) * norm_cdf(-k);
    }
    if r >= SINGULAR_RHO {
        return norm_cdf(-h.max(k));
    }
    if r <= -SINGULAR_RHO {
        return (norm_cdf(-h) - norm_cdf(k)).max(0.0);
    }

    let abs_r = r.abs();
    let rules = rules();
    let rule = if abs_r < 0.3 {
        &rules.small
    } else if abs_r < 0.75 {
        &rules.medium
    } else {
        &rules.large
    };

    if abs_r < 0.925 {
        let hk = h * k;
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        let mut sum = 0.0;
        for (x, w) in rule.iter() {
            let sn = (0.5 * asr * (x + 1.0)).sin();
            sum += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        return sum * asr / (4.0 * PI) + norm_cdf(-h) * norm_cdf(-k);
    }

    // |ρ| ≥ 0.925: reduce to positive correlation by reflecting k.
    let k = if r < 0.0 { -k } else { k };
    let hk = h * k;
    let a_s = (1.0 - r) * (1.0 + r);
    let mut a = a_s.sqrt();
    let b_s = (h - k) * (h - k);
    let c = (4.0 - hk) / 8.0;
    let d = (12.0 - hk) / 16.0;
    let mut bvn = 0.0;
    let asr = -0.5 * (b_s / a_s + hk);
    if asr > -100.0 {
        bvn = a * asr.exp() * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
    }
    if hk > -100.0 {
        let b = b_s.sqrt();
        bvn -= (-0.5 * hk).exp()
            * (2.0 * PI).sqrt()
            * norm_cdf(-b / a)
            * b
            * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
    }
    a *= 0.5;
    for (x, w) in rule.iter() {
        let xs = (a * (x + 1.0)).powi(2);
        let rs = (1.0 - xs).sqrt();
        let asr = -0.5 * (b_s / xs + hk);
        if asr > -100.0 {
            bvn += a
                * w
                * asr.exp()
                * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
        }
    }
    bvn = -bvn / (2.0 * PI);

    if r > 0.0 {
        (bvn + norm_cdf(-h.max(k))).clamp(0.0, 1.0)
    } else {
        // k was reflected; P(X > h, Y > k_orig) = P(X > h) − P(X > h, Y > k).
        let mut val = -bvn;
        if k > h {
            val += if h < 0.0 {
                norm_cdf(k) - norm_cdf(h)
            } else {
                norm_cdf(-h) - norm_cdf(-k)
            };
        }
        val.clamp(0.0, 1.0)
    }
}
