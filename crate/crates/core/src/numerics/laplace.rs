//! Numerical Laplace inversion on the fixed Talbot contour.
//!
//! The contour `s(θ) = rθ(cot θ + i)`, `θ ∈ (−π, π)`, needs the transform at
//! complex arguments, so a [`LaplaceTransform`] carries a complex evaluator.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use super::NumericsError;

type Evaluator = dyn Fn(Complex64) -> Result<Complex64, NumericsError> + Send + Sync;

#[derive(Clone)]
pub struct LaplaceTransform {
    evaluator: Arc<Evaluator>,
    pub domain_note: String,
    atom_probe: bool,
}

impl fmt::Debug for LaplaceTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceTransform")
            .field("domain_note", &self.domain_note)
            .finish()
    }
}

impl LaplaceTransform {
    pub fn new(
        evaluator: impl Fn(Complex64) -> Result<Complex64, NumericsError> + Send + Sync + 'static,
        domain_note: impl Into<String>,
    ) -> Self {
        LaplaceTransform {
            evaluator: Arc::new(evaluator),
            domain_note: domain_note.into(),
            atom_probe: true,
        }
    }

    /// Skips the large-λ probe for a point mass at zero. Useful when the
    /// evaluator is expensive or unreliable far out on the real axis.
    pub fn without_atom_probe(mut self) -> Self {
        self.atom_probe = false;
        self
    }

    pub fn eval(&self, lambda: f64) -> Result<f64, NumericsError> {
        Ok((self.evaluator)(Complex64::new(lambda, 0.0))?.re)
    }

    pub fn eval_complex(&self, s: Complex64) -> Result<Complex64, NumericsError> {
        (self.evaluator)(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionTarget {
    Density,
    /// Inverts `F(λ)/λ`, giving `P(X ≤ t)`.
    Cdf,
}

#[derive(Debug, Clone, Copy)]
pub struct TalbotOptions {
    pub nodes: usize,
    pub target: InversionTarget,
}

impl Default for TalbotOptions {
    fn default() -> Self {
        TalbotOptions {
            nodes: 32,
            target: InversionTarget::Density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: f64,
    /// Difference from a run with fewer nodes.
    pub error_estimate: f64,
}

fn talbot_sum(transform: &LaplaceTransform, t: f64, m: usize, target: InversionTarget) -> Result<f64, NumericsError> {
    let mf = m as f64;
    let r = 2.0 * mf / (5.0 * t);
    let eval = |s: Complex64| -> Result<Complex64, NumericsError> {
        let v = transform.eval_complex(s)?;
        Ok(match target {
            InversionTarget::Density => v,
            InversionTarget::Cdf => v / s,
        })
    };
    let mut acc = 0.5 * (eval(Complex64::new(r, 0.0))? * (r * t).exp()).re;
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / mf;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * eval(s)? * Complex64::new(1.0, sigma);
        acc += term.re;
    }
    let value = r / mf * acc;
    if !value.is_finite() {
        return Err(NumericsError::Inversion(format!("non-finite Talbot sum at t = {t}")));
    }
    Ok(value)
}

/// Inverts with default options (32 nodes, density target).
pub fn invert_laplace(transform: &LaplaceTransform, t: f64) -> Result<f64, NumericsError> {
    invert_laplace_with(transform, t, TalbotOptions::default()).map(|r| r.value)
}

pub fn invert_laplace_with(
    transform: &LaplaceTransform,
    t: f64,
    opts: TalbotOptions,
) -> Result<Inversion, NumericsError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(NumericsError::Domain {
            what: "inversion time",
            value: t,
            expected: "t > 0",
        });
    }
    if opts.nodes < 8 {
        return Err(NumericsError::Domain {
            what: "Talbot node count",
            value: opts.nodes as f64,
            expected: "at least 8 nodes",
        });
    }
    if transform.atom_probe {
        // a law with an atom at zero has a transform that does not vanish at infinity
        if let Ok(far) = transform.eval(1e10 / t) {
            if far.abs() > 1e-2 {
                return Err(NumericsError::Inversion(format!(
                    "transform tends to {far:.3e} as λ → ∞: point mass at zero, no density"
                )));
            }
        }
    }
    let fine = talbot_sum(transform, t, opts.nodes, opts.target)?;
    let coarse = talbot_sum(transform, t, opts.nodes - opts.nodes / 4, opts.target)?;
    let error_estimate = (fine - coarse).abs();
    if error_estimate > 1e-6 * fine.abs() + 1e-10 {
        return Err(NumericsError::Inversion(format!(
            "Talbot sums disagree at t = {t}: {fine:.10e} vs {coarse:.10e}"
        )));
    }
    Ok(Inversion {
        value: fine,
        error_estimate,
    })
}
