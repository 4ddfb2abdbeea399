use std::fmt;
use thiserror::Error;

use crate::numerics::NumericsError;

/// Market assumptions that a configuration can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// The generalized volatility matrix must be invertible.
    Invertibility,
    /// `b^{j,k} > −√h^k` keeps accounts strictly positive.
    Positivity,
    /// Jump columns may only move accounts down.
    DownwardJumps,
    /// `√h^k > θ^k` rules out explosion of positive portfolios.
    NoExplosion,
    /// Jump intensities must be strictly positive.
    PositiveIntensity,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Assumption::Invertibility => "invertible volatility matrix",
            Assumption::Positivity => "strict positivity (b > -sqrt(h))",
            Assumption::DownwardJumps => "downward jumps only",
            Assumption::NoExplosion => "no explosion (sqrt(h) > theta)",
            Assumption::PositiveIntensity => "positive jump intensity",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("assumption violated: {assumption} at t = {t}: {detail}")]
    Assumption {
        assumption: Assumption,
        t: f64,
        detail: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal invariant failed: {0}")]
    Invariant(String),
    #[error("horizon too short: Z_T = {z_t:.3e} exceeds tail threshold {epsilon}")]
    HorizonTooShort { z_t: f64, epsilon: f64 },
    #[error("{label}: infinite expectation, the tail integral of f(y)/y^2 diverges")]
    InfiniteExpectation { label: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
