//! Scalar special functions behind the closed-form acquisitions.

mod bvn;
mod normal;
mod owens_t;
pub mod quadrature;

pub use bvn::{bvn_cdf, bvn_cdf_dx, bvn_cdf_dy, BvnCorrelation};
pub use normal::{inv_mills, log_norm_cdf, norm_cdf, norm_pdf, norm_ppf, std_normal_cdf, FRAC_1_SQRT_2PI, LN_SQRT_2PI};
pub use owens_t::{owens_t, owens_t_unchecked};

/// Binary entropy in bits, with `0 · log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}
