use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("{what}: argument {value} is outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{what}: result leaves the f64 range in the {regime} regime")]
    OutOfRange { what: &'static str, regime: &'static str },

    #[error(
        "quadrature did not converge: best estimate {estimate}, error estimate {error_estimate} after {evaluations} evaluations"
    )]
    QuadratureNonConvergence {
        estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("Laplace inversion rejected: {0}")]
    Inversion(String),

    #[error("series or continued fraction failed to converge in {0}")]
    NoConvergence(&'static str),

    #[error("empty sample")]
    EmptySample,
}
