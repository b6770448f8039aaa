//! Scalar special functions on top of `libm`.

use core::f64::consts::{PI, SQRT_2};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn beta(a: f64, b: f64) -> f64 {
    libm::exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI)
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5) - libm::sqrt(PI)).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((beta(2.0, 3.0) - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        for &x in &[0.3, 1.0, 2.5] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }

}
