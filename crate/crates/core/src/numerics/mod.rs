//! Numerical kernels: special functions, quadrature, Laplace inversion,
//! random streams and samplers.

pub mod bessel;
mod error;
pub mod ks;
pub mod laplace;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod stats;

pub use bessel::{bessel_k, bessel_k_scaled, bessel_k_scaled_complex};
pub use error::NumericsError;
pub use ks::{ks_critical_1pct, ks_critical_two_sample_1pct, ks_statistic, ks_two_sample};
pub use laplace::{invert_laplace, invert_laplace_with, InversionTarget, LaplaceTransform, TalbotOptions};
pub use quadrature::{integrate, integrate_complex, integrate_with_breaks, QuadratureResult};
pub use rng::RngStream;
pub use sampling::{sample_exponential, sample_inverse_gaussian};
pub use stats::Estimate;
