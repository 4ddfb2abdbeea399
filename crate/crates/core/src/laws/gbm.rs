//! Honest time of `N_t = exp(2σW_t − 2σ²t)`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::numerics::{sample_exponential, sample_inverse_gaussian, LaplaceTransform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    pub sigma: f64,
}

impl GbmParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("GBM sigma must be positive, got {sigma}")));
        }
        Ok(GbmParams { sigma })
    }
}

/// `E e^{−λg} = 2/(1 + √(1 + 2λ/σ²))`.
pub fn gbm_laplace(p: &GbmParams, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(invalid(format!("λ must be ≥ 0, got {lambda}")));
    }
    Ok(2.0 / (1.0 + (1.0 + 2.0 * lambda / (p.sigma * p.sigma)).sqrt()))
}

pub fn gbm_laplace_complex(p: &GbmParams, s: Complex64) -> Complex64 {
    2.0 / (1.0 + (1.0 + 2.0 * s / (p.sigma * p.sigma)).sqrt())
}

pub fn gbm_transform(p: GbmParams) -> LaplaceTransform {
    LaplaceTransform::new(
        move |s| Ok(gbm_laplace_complex(&p, s)),
        format!("GBM honest time, sigma = {}", p.sigma),
    )
}

/// `E e^{−λτ_a} = a^{−(√(1/4 + λ/(2σ²)) + 1/2)}` for the first time `N` reaches `a ≥ 1`.
pub fn gbm_hitting_laplace(p: &GbmParams, a: f64, lambda: f64) -> Result<f64> {
    if !(a >= 1.0) {
        return Err(invalid(format!("hitting level must be ≥ N_0 = 1, got {a}")));
    }
    if !(lambda >= 0.0) {
        return Err(invalid(format!("λ must be ≥ 0, got {lambda}")));
    }
    let exponent = (0.25 + lambda / (2.0 * p.sigma * p.sigma)).sqrt() + 0.5;
    Ok(a.powf(-exponent))
}

/// Exact draw: `g` has the law of `T_{e/2}/σ²`, with `e` standard exponential
/// and `T_a` the first passage of `W_t + t` to `a`.
pub fn sample_gbm_honest_time<R: Rng + ?Sized>(p: &GbmParams, rng: &mut R) -> f64 {
    let a = 0.5 * sample_exponential(rng);
    if !(a > 0.0) {
        return 0.0;
    }
    sample_inverse_gaussian(a, a * a, rng).unwrap_or(0.0) / (p.sigma * p.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let p = GbmParams::new(0.2).unwrap();
        let s2 = 0.04;
        assert_eq!(gbm_laplace(&p, 0.0).unwrap(), 1.0);
        assert!((gbm_laplace(&p, 1.5 * s2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((gbm_laplace(&p, 4.0 * s2).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hitting_values() {
        let p = GbmParams::new(0.3).unwrap();
        assert_eq!(gbm_hitting_laplace(&p, 1.0, 0.7).unwrap(), 1.0);
        assert!((gbm_hitting_laplace(&p, 3.0, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let v = gbm_hitting_laplace(&p, 2.0, 1.5 * 0.09).unwrap();
        assert!((v - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert!(gbm_hitting_laplace(&p, 0.5, 1.0).is_err());
    }
}
