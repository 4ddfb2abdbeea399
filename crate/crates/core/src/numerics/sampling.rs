//! Samplers that sit on top of `rand_distr`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, InverseGaussian};

use super::NumericsError;

/// Draws from the inverse-Gaussian law IG(mean, shape). With `mean = a` and
/// `shape = a²` this is the first passage time of `W_t + t` to level `a`.
pub fn sample_inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> Result<f64, NumericsError> {
    inverse_gaussian(mean, shape).map(|d| d.sample(rng))
}

pub fn inverse_gaussian(mean: f64, shape: f64) -> Result<InverseGaussian<f64>, NumericsError> {
    InverseGaussian::new(mean, shape).map_err(|_| NumericsError::Domain {
        what: "inverse-Gaussian parameters",
        value: if mean > 0.0 { shape } else { mean },
        expected: "mean > 0 and shape > 0",
    })
}

pub fn sample_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}
