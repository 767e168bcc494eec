//! Standard normal distribution functions.

use libm::erfc;
use statrs::function::erf::erfc_inv;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `Phi^{-1}(p)` for `p` in `(0, 1)`, polished by one Newton step.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    let d = norm_pdf(x);
    if d > 0.0 {
        // work on the smaller tail to avoid cancellation
        if p < 0.5 {
            x - (norm_cdf(x) - p) / d
        } else {
            x + (norm_sf(x) - (1.0 - p)) / d
        }
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((norm_pdf(0.0) - 0.398_942_280_4).abs() < 1e-10);
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_quantile(0.95) - 1.644_853_626_951_472_2).abs() < 1e-13);
        assert!((norm_sf(1.144_853_626_951_472_2) - 0.126_134_898_193_430_38).abs() < 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-10, 1e-4, 0.1, 0.5, 0.9, 0.99, 1.0 - 1e-9] {
            let x = norm_quantile(p);
            let back = if p < 0.5 { norm_cdf(x) } else { 1.0 - norm_sf(x) };
            assert!((back - p).abs() <= 1e-10 * p.max(1e-6), "p={p}");
        }
    }
}
