//! Laws of the global maximum `Σ∞` of a benchmarked portfolio in class (C₀).
//!
//! `N_0/Σ∞` is uniform on (0,1), and conditionally on `F_t`
//! `E f(Σ∞) = f(Σ_t)(1 − N_t/Σ_t) + N_t ∫_{Σ_t}^∞ f(y)/y² dy`. With
//! `J(z) = ∫_z^∞ f/y²` the martingale representation has integrand
//! `h(z) = J(z) − f(z)/z`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate, integrate_with_breaks, NumericsError};

const QUAD_TOL: f64 = 1e-13;

type PayoffFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Payoff {
    Constant(f64),
    /// `(K − y)⁺`
    Put {
        strike: f64,
    },
    /// `1{y > K}`
    Indicator {
        level: f64,
    },
    /// `c·y^p`, `p > −1`
    Power {
        coeff: f64,
        exponent: f64,
    },
    /// `ln y`
    Log,
    /// `(y − K)⁺`, whose expectation is infinite
    Call {
        strike: f64,
    },
    /// Any payoff; integrals by quadrature, split at `breaks`.
    Custom {
        f: PayoffFn,
        breaks: Vec<f64>,
    },
}

#[derive(Clone)]
pub struct MaxPayoffSpec {
    pub label: String,
    pub payoff: Payoff,
}

impl fmt::Debug for MaxPayoffSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MaxPayoffSpec({})", self.label)
    }
}

fn non_convergent(e: NumericsError) -> Error {
    Error::Numerics(e)
}

impl MaxPayoffSpec {
    pub fn constant(c: f64) -> Self {
        Self::labelled(format!("constant {c}"), Payoff::Constant(c))
    }

    pub fn put(strike: f64) -> Result<Self> {
        positive("strike", strike)?;
        Ok(Self::labelled(format!("put K={strike}"), Payoff::Put { strike }))
    }

    pub fn indicator(level: f64) -> Result<Self> {
        positive("level", level)?;
        Ok(Self::labelled(
            format!("indicator y>{level}"),
            Payoff::Indicator { level },
        ))
    }

    pub fn power(coeff: f64, exponent: f64) -> Result<Self> {
        if !(exponent > -1.0) {
            return Err(invalid(format!("power payoff needs exponent > -1, got {exponent}")));
        }
        Ok(Self::labelled(
            format!("{coeff}*y^{exponent}"),
            Payoff::Power { coeff, exponent },
        ))
    }

    pub fn log() -> Self {
        Self::labelled("log".into(), Payoff::Log)
    }

    pub fn call(strike: f64) -> Result<Self> {
        positive("strike", strike)?;
        Ok(Self::labelled(format!("call K={strike}"), Payoff::Call { strike }))
    }

    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static, breaks: Vec<f64>) -> Self {
        Self::labelled(label.into(), Payoff::Custom { f: Arc::new(f), breaks })
    }

    /// Registry lookup by name, as used in experiment configs.
    pub fn from_name(name: &str, strike: Option<f64>, exponent: Option<f64>) -> Result<Self> {
        let need = |what: &str| strike.ok_or_else(|| Error::Config(format!("payoff '{name}' needs '{what}'")));
        match name {
            "put" => Self::put(need("strike")?),
            "indicator" => Self::indicator(need("strike")?),
            "call" => Self::call(need("strike")?),
            "log" => Ok(Self::log()),
            "constant" => Ok(Self::constant(strike.unwrap_or(1.0))),
            "power" => Self::power(
                strike.unwrap_or(1.0),
                exponent.ok_or_else(|| Error::Config("payoff 'power' needs 'exponent'".into()))?,
            ),
            other => Err(Error::Config(format!(
                "unknown payoff '{other}' (known: put, indicator, call, log, constant, power)"
            ))),
        }
    }

    fn labelled(label: String, payoff: Payoff) -> Self {
        MaxPayoffSpec { label, payoff }
    }

    pub fn f(&self, y: f64) -> f64 {
        match &self.payoff {
            Payoff::Constant(c) => *c,
            Payoff::Put { strike } => (strike - y).max(0.0),
            Payoff::Indicator { level } => (y > *level) as u8 as f64,
            Payoff::Power { coeff, exponent } => coeff * y.powf(*exponent),
            Payoff::Log => y.ln(),
            Payoff::Call { strike } => (y - strike).max(0.0),
            Payoff::Custom { f, .. } => f(y),
        }
    }

    /// Points where `f` has a kink or jump.
    pub fn breaks(&self) -> Vec<f64> {
        match &self.payoff {
            Payoff::Put { strike } | Payoff::Call { strike } => vec![*strike],
            Payoff::Indicator { level } => vec![*level],
            Payoff::Custom { breaks, .. } => breaks.clone(),
            _ => vec![],
        }
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self.payoff, Payoff::Custom { .. })
    }

    /// `F(z) = ∫_0^z f`.
    pub fn primitive(&self, z: f64) -> Result<f64> {
        positive("z", z)?;
        Ok(match &self.payoff {
            Payoff::Constant(c) => c * z,
            Payoff::Put { strike: k } => {
                let m = z.min(*k);
                k * m - 0.5 * m * m
            }
            Payoff::Indicator { level } => (z - level).max(0.0),
            Payoff::Power { coeff, exponent } => coeff * z.powf(exponent + 1.0) / (exponent + 1.0),
            Payoff::Log => z * z.ln() - z,
            Payoff::Call { strike } => 0.5 * (z - strike).max(0.0).powi(2),
            Payoff::Custom { f, breaks } => {
                integrate_with_breaks(|y| f(y), 0.0, z, breaks, QUAD_TOL)
                    .map_err(non_convergent)?
                    .value
            }
        })
    }

    fn infinite(&self) -> Error {
        Error::InfiniteExpectation {
            label: self.label.clone(),
        }
    }

    /// `J(z) = ∫_z^∞ f(y)/y² dy`.
    pub fn tail_integral(&self, z: f64) -> Result<f64> {
        positive("z", z)?;
        match &self.payoff {
            Payoff::Constant(c) => Ok(c / z),
            Payoff::Put { strike: k } => Ok(if z < *k { k / z - 1.0 - (k / z).ln() } else { 0.0 }),
            Payoff::Indicator { level } => Ok(1.0 / z.max(*level)),
            Payoff::Power { coeff, exponent: p } => {
                if *p >= 1.0 && *coeff != 0.0 {
                    Err(self.infinite())
                } else {
                    Ok(coeff * z.powf(p - 1.0) / (1.0 - p))
                }
            }
            Payoff::Log => Ok((z.ln() + 1.0) / z),
            Payoff::Call { .. } => Err(self.infinite()),
            Payoff::Custom { f, breaks } => {
                if tail_diverges(|y| f(y), z) {
                    return Err(self.infinite());
                }
                let g = |y: f64| f(y) / (y * y);
                let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > z).collect();
                cuts.sort_by(f64::total_cmp);
                let last = cuts.last().copied().unwrap_or(z);
                let mut total = if cuts.is_empty() {
                    0.0
                } else {
                    integrate_with_breaks(g, z, last, &cuts, QUAD_TOL)
                        .map_err(non_convergent)?
                        .value
                };
                total += integrate(g, last, f64::INFINITY, QUAD_TOL)
                    .map_err(non_convergent)?
                    .value;
                Ok(total)
            }
        }
    }

    /// `h(z) = ∫_z^∞ (f(y) − f(z))/y² dy`.
    pub fn h(&self, z: f64) -> Result<f64> {
        positive("z", z)?;
        match &self.payoff {
            Payoff::Constant(_) => Ok(0.0),
            Payoff::Put { strike: k } => Ok(if z < *k { -(k / z).ln() } else { 0.0 }),
            Payoff::Indicator { level } => Ok(if z <= *level { 1.0 / level } else { 0.0 }),
            Payoff::Power { coeff, exponent: p } => {
                if *p >= 1.0 && *coeff != 0.0 {
                    Err(self.infinite())
                } else {
                    Ok(coeff * z.powf(p - 1.0) * p / (1.0 - p))
                }
            }
            Payoff::Log => Ok(1.0 / z),
            Payoff::Call { .. } => Err(self.infinite()),
            Payoff::Custom { .. } => Ok(self.tail_integral(z)? - self.f(z) / z),
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be positive and finite, got {v}")))
    }
}

/// Integrability probe for `∫_z^∞ f/y²` over the blocks `[z 2^k, z 2^{k+1}]`:
/// the integral diverges when block contributions stop shrinking.
fn tail_diverges(f: impl Fn(f64) -> f64, z: f64) -> bool {
    let block = |k: i32| {
        let lo = z * 2f64.powi(k);
        integrate(|y| f(y) / (y * y), lo, 2.0 * lo, 1e-10)
            .map(|r| r.value.abs())
            .unwrap_or(f64::INFINITY)
    };
    let (a, b, c) = (block(40), block(41), block(42));
    if !(c.is_finite()) {
        return true;
    }
    let scale = (0..8).map(block).fold(0.0, f64::max).max(1e-300);
    c > 1e-12 * scale && c >= 0.97 * b && b >= 0.97 * a
}

/// Doob's maximal identity: `P(Σ∞ > a) = (x/a) ∧ 1` for `N_0 = x`.
pub fn doob_tail(x: f64, a: f64) -> Result<f64> {
    positive("x", x)?;
    positive("a", a)?;
    Ok((x / a).min(1.0))
}

fn check_state(n_t: f64, sigma_t: f64) -> Result<()> {
    if !(n_t > 0.0) || !(n_t <= sigma_t) {
        return Err(invalid(format!("need 0 < N_t ≤ Σ_t, got N_t = {n_t}, Σ_t = {sigma_t}")));
    }
    Ok(())
}

/// `E(f(Σ∞) | N_t, Σ_t)`, using the closed form of `J` where registered.
pub fn conditional_max_expectation(spec: &MaxPayoffSpec, n_t: f64, sigma_t: f64) -> Result<f64> {
    check_state(n_t, sigma_t)?;
    let head = if n_t == sigma_t {
        0.0
    } else {
        spec.f(sigma_t) * (1.0 - n_t / sigma_t)
    };
    Ok(head + n_t * spec.tail_integral(sigma_t)?)
}

/// The same expectation in its other form, `f(Σ_t)(1 − N_t/Σ_t) +
/// ∫_0^{N_t/Σ_t} f(N_t/x) dx`, always by quadrature.
pub fn conditional_max_expectation_sum_form(spec: &MaxPayoffSpec, n_t: f64, sigma_t: f64) -> Result<f64> {
    check_state(n_t, sigma_t)?;
    // finiteness is decided by the same criterion as the y-integral form
    spec.tail_integral(sigma_t)?;
    let upper = n_t / sigma_t;
    let cuts: Vec<f64> = spec
        .breaks()
        .iter()
        .map(|&b| n_t / b)
        .filter(|&x| x > 0.0 && x < upper)
        .collect();
    let integral = integrate_with_breaks(|x| spec.f(n_t / x), 0.0, upper, &cuts, QUAD_TOL).map_err(non_convergent)?;
    Ok(spec.f(sigma_t) * (1.0 - upper) + integral.value)
}

/// `E f(Σ∞)` for `N_0 = x`, from the density of `Σ∞ = x/U`.
pub fn unconditional_max_expectation(spec: &MaxPayoffSpec, x: f64) -> Result<f64> {
    conditional_max_expectation(spec, x, x)
}

/// The Azéma–Yor local martingale `F(Σ_t) − f(Σ_t)(Σ_t − N_t)`.
pub fn azema_yor_value(spec: &MaxPayoffSpec, n_t: f64, sigma_t: f64) -> Result<f64> {
    check_state(n_t, sigma_t)?;
    Ok(spec.primitive(sigma_t)? - spec.f(sigma_t) * (sigma_t - n_t))
}

fn check_paths(n: &[f64], sigma: &[f64]) -> Result<()> {
    if n.is_empty() || n.len() != sigma.len() {
        return Err(invalid("path and running maximum must be nonempty and of equal length"));
    }
    Ok(())
}

/// `F(Σ_0) + Σ_i f(Σ_{t_i})(N_{t_{i+1}} − N_{t_i})`.
pub fn ay_integral_replay(spec: &MaxPayoffSpec, n: &[f64], sigma: &[f64]) -> Result<Vec<f64>> {
    check_paths(n, sigma)?;
    let mut acc = spec.primitive(sigma[0])?;
    let mut out = Vec::with_capacity(n.len());
    out.push(acc);
    for i in 1..n.len() {
        acc += spec.f(sigma[i - 1]) * (n[i] - n[i - 1]);
        out.push(acc);
    }
    Ok(out)
}

/// Azéma–Yor values along a path.
pub fn azema_yor_path(spec: &MaxPayoffSpec, n: &[f64], sigma: &[f64]) -> Result<Vec<f64>> {
    check_paths(n, sigma)?;
    n.iter()
        .zip(sigma)
        .map(|(&x, &s)| azema_yor_value(spec, x, s))
        .collect()
}

pub fn representation_integrand(spec: &MaxPayoffSpec, z: f64) -> Result<f64> {
    spec.h(z)
}

/// `E f(Σ∞) + Σ_i h(Σ_{t_i})(N_{t_{i+1}} − N_{t_i})`, to be compared with the
/// conditional expectation along the path.
pub fn representation_replay(spec: &MaxPayoffSpec, n: &[f64], sigma: &[f64]) -> Result<Vec<f64>> {
    check_paths(n, sigma)?;
    let mut acc = conditional_max_expectation(spec, n[0], sigma[0])?;
    let mut out = Vec::with_capacity(n.len());
    out.push(acc);
    for i in 1..n.len() {
        acc += spec.h(sigma[i - 1])? * (n[i] - n[i - 1]);
        out.push(acc);
    }
    Ok(out)
}

pub fn conditional_expectation_path(spec: &MaxPayoffSpec, n: &[f64], sigma: &[f64]) -> Result<Vec<f64>> {
    check_paths(n, sigma)?;
    n.iter()
        .zip(sigma)
        .map(|(&x, &s)| conditional_max_expectation(spec, x, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registered() -> Vec<MaxPayoffSpec> {
        vec![
            MaxPayoffSpec::constant(1.7),
            MaxPayoffSpec::put(2.5).unwrap(),
            MaxPayoffSpec::indicator(2.0).unwrap(),
            MaxPayoffSpec::power(1.3, 0.5).unwrap(),
            MaxPayoffSpec::log(),
        ]
    }

    #[test]
    fn doob_tail_values() {
        assert_eq!(doob_tail(1.0, 0.5).unwrap(), 1.0);
        assert_eq!(doob_tail(1.0, 2.0).unwrap(), 0.5);
        assert_eq!(doob_tail(2.0, 8.0).unwrap(), 0.25);
    }

    #[test]
    fn conditional_expectation_values() {
        assert!((conditional_max_expectation(&MaxPayoffSpec::constant(3.0), 0.7, 1.9).unwrap() - 3.0).abs() < 1e-15);
        assert!(
            (conditional_max_expectation(&MaxPayoffSpec::indicator(2.0).unwrap(), 1.0, 1.0).unwrap() - 0.5).abs()
                < 1e-15
        );
        let put = MaxPayoffSpec::put(2.5).unwrap();
        let v = conditional_max_expectation(&put, 1.0, 1.0).unwrap();
        assert!((v - 0.583_709_268_125_844_9).abs() < 1e-15);
    }

    #[test]
    fn call_is_infinite() {
        let call = MaxPayoffSpec::call(1.0).unwrap();
        assert!(matches!(
            conditional_max_expectation(&call, 1.0, 1.0),
            Err(Error::InfiniteExpectation { .. })
        ));
        let lin = MaxPayoffSpec::custom("y", |y| y, vec![]);
        assert!(matches!(lin.tail_integral(1.0), Err(Error::InfiniteExpectation { .. })));
        let sqrt = MaxPayoffSpec::custom("sqrt", |y: f64| y.sqrt(), vec![]);
        assert!((sqrt.tail_integral(4.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn azema_yor_examples() {
        let one = MaxPayoffSpec::constant(1.0);
        assert_eq!(azema_yor_value(&one, 0.6, 1.4).unwrap(), 0.6);
        let two_y = MaxPayoffSpec::power(2.0, 1.0).unwrap();
        assert!((azema_yor_value(&two_y, 1.5, 2.0).unwrap() - 2.0).abs() < 1e-15);
        let put = MaxPayoffSpec::put(2.5).unwrap();
        assert_eq!(azema_yor_value(&put, 1.2, 1.2).unwrap(), put.primitive(1.2).unwrap());
    }

    #[test]
    fn replay_with_constant_integrand_telescopes() {
        let one = MaxPayoffSpec::constant(1.0);
        let n = [1.0, 1.3, 0.9, 1.6, 1.1];
        let (s, _) = crate::path_stats::running_extrema(&n).unwrap();
        let rep = ay_integral_replay(&one, &n, &s).unwrap();
        let ay = azema_yor_path(&one, &n, &s).unwrap();
        for (a, b) in rep.iter().zip(&ay) {
            assert!((a - b).abs() < 1e-15);
        }
        let flat = [1.4; 4];
        let rep = ay_integral_replay(&MaxPayoffSpec::put(2.5).unwrap(), &flat, &flat).unwrap();
        assert!(rep.iter().all(|&v| v == rep[0]));
    }

    #[test]
    fn put_integrand() {
        let put = MaxPayoffSpec::put(2.5).unwrap();
        assert!((representation_integrand(&put, 1.0).unwrap() + 0.916_290_731_874_155_1).abs() < 1e-15);
        assert_eq!(representation_integrand(&put, 2.5).unwrap(), 0.0);
        assert_eq!(
            representation_integrand(&MaxPayoffSpec::constant(2.0), 1.3).unwrap(),
            0.0
        );
        // closed form against quadrature of the defining integral
        for z in [0.3, 1.0, 1.7, 2.4, 2.5, 3.0] {
            let k = 2.5;
            let q = integrate_with_breaks(
                |y| ((k - y).max(0.0) - (k - z).max(0.0)) / (y * y),
                z,
                f64::INFINITY,
                &[k],
                1e-14,
            )
            .unwrap()
            .value;
            let exact = if z < k { -(k / z).ln() } else { 0.0 };
            assert!((q - exact).abs() < 1e-12, "z = {z}: {q} vs {exact}");
            assert!((put.h(z).unwrap() - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for spec in registered() {
            let f = spec.clone();
            let custom = MaxPayoffSpec::custom("copy", move |y| f.f(y), spec.breaks());
            for z in [0.4, 1.0, 2.2, 3.5] {
                let (a, b) = (spec.tail_integral(z).unwrap(), custom.tail_integral(z).unwrap());
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{:?} J({z})", spec);
                let (a, b) = (spec.h(z).unwrap(), custom.h(z).unwrap());
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{:?} h({z})", spec);
                let (a, b) = (spec.primitive(z).unwrap(), custom.primitive(z).unwrap());
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{:?} F({z})", spec);
            }
        }
    }

    #[test]
    fn two_forms_agree() {
        for spec in registered() {
            for (n, s) in [(1.0, 1.0), (0.4, 1.6), (0.8, 1.2), (2.0, 3.0), (0.05, 2.6)] {
                let a = conditional_max_expectation(&spec, n, s).unwrap();
                let b = conditional_max_expectation_sum_form(&spec, n, s).unwrap();
                assert!((a - b).abs() < 1e-12, "{:?} at ({n}, {s}): {a} vs {b}", spec);
            }
        }
    }

    #[test]
    fn tower_property_and_log_mean() {
        for spec in registered() {
            let x = 1.3;
            let direct = integrate_with_breaks(
                |u| spec.f(x / u),
                0.0,
                1.0,
                &spec.breaks().iter().map(|b| x / b).collect::<Vec<_>>(),
                1e-13,
            )
            .unwrap()
            .value;
            assert!((unconditional_max_expectation(&spec, x).unwrap() - direct).abs() < 1e-10);
        }
        let q = integrate(|u: f64| -u.ln(), 0.0, 1.0, 1e-12).unwrap().value;
        assert!((q - 1.0).abs() < 1e-8);
        assert!((unconditional_max_expectation(&MaxPayoffSpec::log(), 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn registry_names() {
        assert!(MaxPayoffSpec::from_name("put", Some(2.5), None).is_ok());
        assert!(matches!(
            MaxPayoffSpec::from_name("straddle", None, None),
            Err(Error::Config(_))
        ));
        assert!(MaxPayoffSpec::from_name("put", None, None).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn monotone_payoffs_give_monotone_values(n in 0.05..2.0f64, gap in 0.0..2.0f64, dn in 0.0..0.5f64, ds in 0.0..0.5f64) {
                let s = n + gap;
                for spec in [MaxPayoffSpec::indicator(2.0).unwrap(), MaxPayoffSpec::log(), MaxPayoffSpec::power(1.0, 0.5).unwrap()] {
                    let base = conditional_max_expectation(&spec, n, s).unwrap();
                    let up_n = conditional_max_expectation(&spec, (n + dn).min(s), s).unwrap();
                    let up_s = conditional_max_expectation(&spec, n, s + ds).unwrap();
                    prop_assert!(up_n >= base - 1e-12);
                    prop_assert!(up_s >= base - 1e-12);
                }
            }
        }
    }
}
