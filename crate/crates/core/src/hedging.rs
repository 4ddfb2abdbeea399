//! The put on the global maximum, `(K − Σ∞)⁺`, priced and hedged in
//! benchmarked units.
//!
//! Before `Σ` reaches `K` the benchmarked value is `(K − Σ_t) − N_t ln(K/Σ_t)`
//! and the hedge holds `−ln(K/Σ_t)` units of the benchmarked asset, the rest
//! of the wealth sitting in the GOP. Once `Σ_t ≥ K` both are zero for good.

use crate::error::{invalid, Error, Result};
use crate::sde::{BenchmarkedPath, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PutSpec {
    pub strike: f64,
}

impl PutSpec {
    pub fn new(strike: f64) -> Result<Self> {
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(invalid(format!("put strike must be positive, got {strike}")));
        }
        Ok(PutSpec { strike })
    }
}

/// Benchmarked value `V̂_t` of the put on `Σ∞`.
pub fn put_on_max_value(strike: f64, n_t: f64, sigma_t: f64) -> Result<f64> {
    PutSpec::new(strike)?;
    if !(n_t > 0.0) || !(n_t <= sigma_t) {
        return Err(invalid(format!("need 0 < N_t ≤ Σ_t, got N_t = {n_t}, Σ_t = {sigma_t}")));
    }
    if sigma_t >= strike {
        return Ok(0.0);
    }
    let log_ratio = (strike / sigma_t).ln();
    let value = (strike - sigma_t) - n_t * log_ratio;
    let unsimplified = (strike - sigma_t) * (1.0 - n_t / sigma_t) + n_t * (strike / sigma_t - 1.0 - log_ratio);
    if (value - unsimplified).abs() > 1e-12 * strike.max(1.0) {
        return Err(Error::Invariant(format!(
            "put value forms disagree: {value} vs {unsimplified}"
        )));
    }
    Ok(value)
}

/// Units of the benchmarked asset held by the hedge.
pub fn put_hedge_units(strike: f64, sigma_t: f64) -> Result<f64> {
    PutSpec::new(strike)?;
    if !(sigma_t > 0.0) {
        return Err(invalid(format!("Σ_t must be positive, got {sigma_t}")));
    }
    Ok(if sigma_t < strike {
        -(strike / sigma_t).ln()
    } else {
        0.0
    })
}

/// A discrete self-financing hedge replayed along one path.
#[derive(Debug, Clone)]
pub struct HedgeLedger {
    pub grid: TimeGrid,
    pub n: Vec<f64>,
    pub sigma: Vec<f64>,
    pub z: Vec<f64>,
    pub units_in_asset: Vec<f64>,
    pub benchmarked_value: Vec<f64>,
    pub wealth: Vec<f64>,
    pub tracking_error: Vec<f64>,
    /// `(K − Σ_T)⁺`, the finite-horizon stand-in for the payoff.
    pub terminal_payoff_estimate: f64,
    /// First rebalance index with `Σ ≥ K`, if any.
    pub absorbed_at: Option<usize>,
}

impl HedgeLedger {
    pub fn terminal_tracking_error(&self) -> f64 {
        *self.tracking_error.last().unwrap()
    }
}

/// Rebalances at the points of `rebalance`, which must be a sub-grid of the
/// path grid. The hedger sees the path only at rebalance times, so `Σ` is the
/// running maximum of those observations.
pub fn hedge_backtest(strike: f64, path: &BenchmarkedPath, rebalance: &TimeGrid) -> Result<HedgeLedger> {
    PutSpec::new(strike)?;
    let idx = path
        .grid
        .indices_of(rebalance)
        .ok_or_else(|| invalid("rebalance grid is not nested in the path grid"))?;
    let n: Vec<f64> = idx.iter().map(|&i| path.n[i]).collect();
    let (sigma, _) = crate::path_stats::running_extrema(&n)?;
    let z = crate::path_stats::azema_process(&n, &sigma)?;
    let len = n.len();
    let mut units = Vec::with_capacity(len);
    let mut value = Vec::with_capacity(len);
    let mut wealth = Vec::with_capacity(len);
    let mut tracking = Vec::with_capacity(len);
    let mut absorbed_at = None;
    let mut w = put_on_max_value(strike, n[0], sigma[0])?;
    for i in 0..len {
        if i > 0 {
            w += units[i - 1] * (n[i] - n[i - 1]);
        }
        let v = put_on_max_value(strike, n[i], sigma[i])?;
        let u = put_hedge_units(strike, sigma[i])?;
        if absorbed_at.is_none() && sigma[i] >= strike {
            absorbed_at = Some(i);
        }
        units.push(u);
        value.push(v);
        wealth.push(w);
        tracking.push(w - v);
    }
    Ok(HedgeLedger {
        grid: rebalance.clone(),
        terminal_payoff_estimate: (strike - sigma[len - 1]).max(0.0),
        n,
        sigma,
        z,
        units_in_asset: units,
        benchmarked_value: value,
        wealth,
        tracking_error: tracking,
        absorbed_at,
    })
}

#[derive(Debug, Clone)]
pub struct ProtectedPortfolio {
    /// `U_t = N_t + V̂_t`.
    pub u: Vec<f64>,
    pub min_u: f64,
    /// `(K − Σ_T)⁺`, the level `U` approaches as `Z_t → 0`.
    pub floor_estimate: f64,
}

pub fn protected_portfolio(path: &BenchmarkedPath, strike: f64) -> Result<ProtectedPortfolio> {
    let mut u = Vec::with_capacity(path.n.len());
    for (i, (&n, &s)) in path.n.iter().zip(&path.sigma).enumerate() {
        let v = put_on_max_value(strike, n, s)?;
        let ui = n + v;
        if ui < n {
            return Err(Error::Invariant(format!("protected portfolio below N at index {i}")));
        }
        u.push(ui);
    }
    let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ProtectedPortfolio {
        u,
        min_u,
        floor_estimate: (strike - path.sigma.last().unwrap()).max(0.0),
    })
}
