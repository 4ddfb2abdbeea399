use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Assumption, Error, Result};

pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Coefficient depending on time and the account values `(X^0, …, X^d)`.
pub type VectorFn = Arc<dyn Fn(f64, &[f64]) -> DVector<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;

/// A jump-diffusion market with `m` Wiener drivers and `d − m` jump drivers.
///
/// Account `j ≥ 1` follows `dX^j = X^j_{t−}(a^j dt + Σ_k b^{j,k} dW^k)`, where
/// for jump columns `dW^k = (dp^k − h^k dt)/√h^k`; `X^0` is the savings account.
#[derive(Clone)]
pub struct MarketConfig {
    pub m: usize,
    pub d: usize,
    pub r: RateFn,
    pub a: VectorFn,
    pub b: MatrixFn,
    pub h: VectorFn,
    /// Upper bounds on each intensity, used for thinning.
    pub h_majorant: Vec<f64>,
    pub x0: Vec<f64>,
}

impl fmt::Debug for MarketConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarketConfig")
            .field("m", &self.m)
            .field("d", &self.d)
            .field("h_majorant", &self.h_majorant)
            .field("x0", &self.x0)
            .finish_non_exhaustive()
    }
}

/// Coefficients frozen at one `(t, state)`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub r: f64,
    pub a: DVector<f64>,
    pub b: DMatrix<f64>,
    pub h: DVector<f64>,
    pub theta: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct ProbePoint {
    pub t: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub probes_checked: usize,
}

impl MarketConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        d: usize,
        r: RateFn,
        a: VectorFn,
        b: MatrixFn,
        h: VectorFn,
        h_majorant: Vec<f64>,
        x0: Vec<f64>,
    ) -> Result<Self> {
        if d < m.max(1) {
            return Err(invalid(format!("need d ≥ max(m, 1), got m = {m}, d = {d}")));
        }
        if x0.len() != d + 1 || x0.iter().any(|&x| !(x > 0.0)) {
            return Err(invalid(format!("x0 must hold {} positive values", d + 1)));
        }
        if h_majorant.len() != d - m || h_majorant.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(invalid(format!(
                "h_majorant must hold {} positive finite values",
                d - m
            )));
        }
        Ok(MarketConfig {
            m,
            d,
            r,
            a,
            b,
            h,
            h_majorant,
            x0,
        })
    }

    /// Constant coefficients; the intensities double as their own majorant.
    pub fn constant(
        m: usize,
        d: usize,
        r: f64,
        a: Vec<f64>,
        b: DMatrix<f64>,
        h: Vec<f64>,
        x0: Vec<f64>,
    ) -> Result<Self> {
        if a.len() != d || b.nrows() != d || b.ncols() != d || h.len() != d.saturating_sub(m) {
            return Err(invalid("coefficient dimensions do not match (m, d)"));
        }
        let av = DVector::from_vec(a);
        let hv = DVector::from_vec(h.clone());
        Self::new(
            m,
            d,
            Arc::new(move |_| r),
            Arc::new(move |_, _| av.clone()),
            Arc::new(move |_, _| b.clone()),
            Arc::new(move |_, _| hv.clone()),
            h,
            x0,
        )
    }

    /// One stock with constant appreciation rate and volatility.
    pub fn black_scholes(r: f64, a: f64, sigma: f64, x0: [f64; 2]) -> Result<Self> {
        Self::constant(
            1,
            1,
            r,
            vec![a],
            DMatrix::from_element(1, 1, sigma),
            vec![],
            x0.to_vec(),
        )
    }

    pub fn is_jump_column(&self, k: usize) -> bool {
        k >= self.m
    }

    /// Evaluates the coefficients and the market price of risk, checking the
    /// market assumptions at this point.
    pub fn coefficients(&self, t: f64, state: &[f64]) -> Result<Coefficients> {
        let r = (self.r)(t);
        let a = (self.a)(t, state);
        let b = (self.b)(t, state);
        let h = (self.h)(t, state);
        if a.len() != self.d || b.nrows() != self.d || b.ncols() != self.d || h.len() != self.d - self.m {
            return Err(invalid(format!("coefficient dimensions wrong at t = {t}")));
        }
        for (k, &hk) in h.iter().enumerate() {
            if !(hk > 0.0) {
                return Err(Error::Assumption {
                    assumption: Assumption::PositiveIntensity,
                    t,
                    detail: format!("h^{} = {hk}", k + self.m + 1),
                });
            }
        }
        for j in 0..self.d {
            for k in self.m..self.d {
                let root = h[k - self.m].sqrt();
                let bjk = b[(j, k)];
                if !(bjk > -root) {
                    return Err(Error::Assumption {
                        assumption: Assumption::Positivity,
                        t,
                        detail: format!("b^({},{}) = {bjk} ≤ -sqrt(h) = {}", j + 1, k + 1, -root),
                    });
                }
                if bjk > 0.0 {
                    return Err(Error::Assumption {
                        assumption: Assumption::DownwardJumps,
                        t,
                        detail: format!("b^({},{}) = {bjk} > 0 gives an upward jump", j + 1, k + 1),
                    });
                }
            }
        }
        let theta = solve_theta(&a, r, &b).ok_or_else(|| Error::Assumption {
            assumption: Assumption::Invertibility,
            t,
            detail: "volatility matrix is singular".into(),
        })?;
        for k in self.m..self.d {
            let root = h[k - self.m].sqrt();
            if !(root > theta[k]) {
                return Err(Error::Assumption {
                    assumption: Assumption::NoExplosion,
                    t,
                    detail: format!("theta^{} = {} ≥ sqrt(h) = {root}", k + 1, theta[k]),
                });
            }
        }
        Ok(Coefficients { r, a, b, h, theta })
    }
}

fn solve_theta(a: &DVector<f64>, r: f64, b: &DMatrix<f64>) -> Option<DVector<f64>> {
    let sv = b.clone().svd(false, false).singular_values;
    let (lo, hi) = sv
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if !(hi > 0.0) || lo <= 1e-13 * hi {
        return None;
    }
    let excess = a.map(|ai| ai - r);
    let lu = b.clone().lu();
    let mut theta = lu.solve(&excess)?;
    // one step of iterative refinement
    let resid = &excess - b * &theta;
    if let Some(corr) = lu.solve(&resid) {
        theta += corr;
    }
    Some(theta)
}

/// Checks every market assumption at each probe point and reports the first
/// violation.
pub fn validate_config(cfg: &MarketConfig, probe_points: &[ProbePoint]) -> Result<ValidationReport> {
    if probe_points.is_empty() {
        return Err(invalid("validate_config needs at least one probe point"));
    }
    for p in probe_points {
        if p.state.len() != cfg.d + 1 {
            return Err(invalid(format!("probe state must hold {} account values", cfg.d + 1)));
        }
        cfg.coefficients(p.t, &p.state)?;
    }
    Ok(ValidationReport {
        probes_checked: probe_points.len(),
    })
}

/// `θ = b⁻¹(a − r·1)`.
pub fn market_prices_of_risk(cfg: &MarketConfig, t: f64, state: &[f64]) -> Result<DVector<f64>> {
    let c = cfg.coefficients(t, state)?;
    let excess = c.a.map(|ai| ai - c.r);
    let resid = (&c.b * &c.theta - &excess).norm();
    if resid > 1e-12 * excess.norm().max(f64::MIN_POSITIVE) && resid > 0.0 {
        return Err(Error::Invariant(format!("market price of risk residual {resid:.3e}")));
    }
    Ok(c.theta)
}

/// Exposures `c` of the growth optimal portfolio: `θ^k` on Wiener columns and
/// `θ^k/(1 − θ^k/√h^k)` on jump columns.
pub fn gop_exposures(m: usize, c: &Coefficients) -> DVector<f64> {
    DVector::from_fn(c.theta.len(), |k, _| {
        let th = c.theta[k];
        if k < m {
            th
        } else {
            th / (1.0 - th / c.h[k - m].sqrt())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(d: usize) -> Vec<ProbePoint> {
        vec![ProbePoint {
            t: 0.0,
            state: vec![1.0; d + 1],
        }]
    }

    #[test]
    fn black_scholes_is_accepted() {
        let cfg = MarketConfig::black_scholes(0.01, 0.05, 0.2, [1.0, 1.0]).unwrap();
        assert_eq!(validate_config(&cfg, &probe(1)).unwrap().probes_checked, 1);
        let th = market_prices_of_risk(&cfg, 0.0, &[1.0, 1.0]).unwrap();
        assert!((th[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_excess_return_has_zero_price_of_risk() {
        let cfg = MarketConfig::black_scholes(0.03, 0.03, 0.2, [1.0, 1.0]).unwrap();
        assert_eq!(market_prices_of_risk(&cfg, 0.0, &[1.0, 1.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn diagonal_prices_of_risk() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![0.2, 0.4]));
        let cfg = MarketConfig::constant(2, 2, 0.01, vec![0.05, 0.09], b, vec![], vec![1.0; 3]).unwrap();
        let th = market_prices_of_risk(&cfg, 0.0, &[1.0; 3]).unwrap();
        assert!((th[0] - 0.2).abs() < 1e-14 && (th[1] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn boundary_jump_coefficient_is_rejected() {
        let h: f64 = 0.25;
        let b = DMatrix::from_element(1, 1, -h.sqrt());
        let cfg = MarketConfig::constant(0, 1, 0.0, vec![-0.1], b, vec![h], vec![1.0, 1.0]).unwrap();
        match validate_config(&cfg, &probe(1)) {
            Err(Error::Assumption { assumption, .. }) => assert_eq!(assumption, Assumption::Positivity),
            other => panic!("expected positivity rejection, got {other:?}"),
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let b = DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.2, 0.1]);
        let cfg = MarketConfig::constant(2, 2, 0.0, vec![0.05, 0.05], b, vec![], vec![1.0; 3]).unwrap();
        match validate_config(&cfg, &probe(2)) {
            Err(Error::Assumption { assumption, .. }) => assert_eq!(assumption, Assumption::Invertibility),
            other => panic!("expected invertibility rejection, got {other:?}"),
        }
    }

    #[test]
    fn upward_jumps_and_explosion_are_rejected() {
        let up = MarketConfig::constant(
            0,
            1,
            0.0,
            vec![0.1],
            DMatrix::from_element(1, 1, 0.1),
            vec![1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            validate_config(&up, &probe(1)),
            Err(Error::Assumption {
                assumption: Assumption::DownwardJumps,
                ..
            })
        ));
        // θ = (a − r)/b = (−0.5)/(−0.5) = 1 = √h
        let boom = MarketConfig::constant(
            0,
            1,
            0.0,
            vec![-0.5],
            DMatrix::from_element(1, 1, -0.5),
            vec![1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            validate_config(&boom, &probe(1)),
            Err(Error::Assumption {
                assumption: Assumption::NoExplosion,
                ..
            })
        ));
    }
}
