//! Driver simulation and the shared log-Euler kernel.
//!
//! All wealth processes are stepped in log space with coefficients frozen at
//! the left end of each step. For exposures `v` (so that `dX/X = r dt +
//! Σ_k v_k(θ_k dt + dW^k)`) one step adds
//!
//! ```text
//! (r + v·θ − ½Σ_{k≤m} v_k² − Σ_{k>m} v_k√h_k) Δt + Σ_{k≤m} v_k ΔW^k + Σ_{k>m} Δp^k ln(1 + v_k/√h_k)
//! ```
//!
//! which is exact for constant coefficients.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use std::sync::Arc;

use super::grid::TimeGrid;
use super::market::{gop_exposures, Coefficients, MarketConfig};
use crate::error::{invalid, Error, Result};

/// Redraw limit for steps where two jump drivers fire together.
const MAX_REDRAWS: usize = 10_000;

/// Recorded randomness of one path, indexed `[driver][step]`.
#[derive(Debug, Clone)]
pub struct Drivers {
    pub grid: TimeGrid,
    pub m: usize,
    pub d: usize,
    pub dw: Vec<Vec<f64>>,
    pub dp: Vec<Vec<u32>>,
    /// Intensities at the left end of each step.
    pub h: Vec<Vec<f64>>,
}

/// Fractions `π^j`, `j = 0..=d`, as a function of time and account values.
type FractionFn = dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + Send + Sync;

#[derive(Clone)]
pub struct Strategy {
    fractions: Arc<FractionFn>,
}

impl Strategy {
    pub fn new(f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Strategy {
            fractions: Arc::new(move |t, s| Ok(f(t, s))),
        }
    }

    pub fn constant(pi: Vec<f64>) -> Self {
        Self::new(move |_, _| pi.clone())
    }

    /// Everything in account `j`.
    pub fn single(d: usize, j: usize) -> Self {
        let mut pi = vec![0.0; d + 1];
        pi[j] = 1.0;
        Self::constant(pi)
    }

    /// Fractions `π = b^{−⊤}c` that replicate the growth optimal portfolio.
    pub fn gop_replicating(cfg: &MarketConfig) -> Self {
        let cfg = cfg.clone();
        Strategy {
            fractions: Arc::new(move |t, state| {
                let c = cfg.coefficients(t, state)?;
                let target = gop_exposures(cfg.m, &c);
                let pi =
                    c.b.transpose()
                        .lu()
                        .solve(&target)
                        .ok_or_else(|| Error::Invariant("singular volatility matrix".into()))?;
                let mut out = Vec::with_capacity(cfg.d + 1);
                out.push(1.0 - pi.sum());
                out.extend(pi.iter());
                Ok(out)
            }),
        }
    }

    pub fn fractions(&self, t: f64, state: &[f64]) -> Result<Vec<f64>> {
        (self.fractions)(t, state)
    }
}

/// One log-space step for a wealth process with exposures `v`.
fn log_step(m: usize, c: &Coefficients, v: &DVector<f64>, drv: &Drivers, step: usize, dt: f64) -> Result<f64> {
    let d = v.len();
    let mut drift = c.r + v.dot(&c.theta);
    let mut diffusion = 0.0;
    let mut jumps = 0.0;
    for k in 0..d {
        if k < m {
            drift -= 0.5 * v[k] * v[k];
            diffusion += v[k] * drv.dw[k][step];
        } else {
            let root = c.h[k - m].sqrt();
            drift -= v[k] * root;
            let n = drv.dp[k - m][step];
            if n > 0 {
                let factor = 1.0 + v[k] / root;
                if !(factor > 0.0) {
                    return Err(Error::Invariant(format!(
                        "jump factor {factor} ≤ 0 at step {step}: wealth would not stay positive"
                    )));
                }
                jumps += n as f64 * factor.ln();
            }
        }
    }
    Ok(drift * dt + diffusion + jumps)
}

fn account_exposure(c: &Coefficients, j: usize) -> DVector<f64> {
    if j == 0 {
        DVector::zeros(c.theta.len())
    } else {
        c.b.row(j - 1).transpose()
    }
}

/// Steps the accounts once, in place.
fn step_accounts(
    cfg: &MarketConfig,
    c: &Coefficients,
    state: &mut [f64],
    drv: &Drivers,
    step: usize,
    dt: f64,
) -> Result<()> {
    for (j, x) in state.iter_mut().enumerate() {
        let v = account_exposure(c, j);
        *x *= log_step(cfg.m, c, &v, drv, step, dt)?.exp();
        if !(*x > 0.0) || !x.is_finite() {
            return Err(Error::Invariant(format!("account {j} left (0, ∞) at step {step}: {x}")));
        }
    }
    Ok(())
}

/// Simulates Wiener increments and thinned jump counts. Because intensities
/// may depend on the accounts, the accounts are stepped alongside.
pub fn simulate_drivers<R: Rng + ?Sized>(cfg: &MarketConfig, grid: &TimeGrid, rng: &mut R) -> Result<Drivers> {
    let steps = grid.steps();
    let jumps = cfg.d - cfg.m;
    let mut drv = Drivers {
        grid: grid.clone(),
        m: cfg.m,
        d: cfg.d,
        dw: vec![vec![0.0; steps]; cfg.m],
        dp: vec![vec![0; steps]; jumps],
        h: vec![vec![0.0; steps]; jumps],
    };
    let mut state = cfg.x0.clone();
    let mut counts = vec![0u32; jumps];
    for i in 0..steps {
        let t = grid.times()[i];
        let dt = grid.dt(i);
        let c = cfg.coefficients(t, &state)?;
        for k in 0..cfg.m {
            let z: f64 = rng.sample(StandardNormal);
            drv.dw[k][i] = dt.sqrt() * z;
        }
        if jumps > 0 {
            let mut redraws = 0;
            loop {
                for k in 0..jumps {
                    let hk = c.h[k];
                    let major = cfg.h_majorant[k];
                    if hk > major * (1.0 + 1e-12) {
                        return Err(invalid(format!(
                            "intensity h^{} = {hk} exceeds its majorant {major}",
                            k + cfg.m + 1
                        )));
                    }
                    let candidates = Poisson::new(major * dt)
                        .map_err(|e| invalid(format!("jump intensity: {e}")))?
                        .sample(rng) as u64;
                    counts[k] = if candidates == 0 {
                        0
                    } else {
                        Binomial::new(candidates, (hk / major).min(1.0))
                            .map_err(|e| invalid(format!("thinning: {e}")))?
                            .sample(rng) as u32
                    };
                }
                if counts.iter().filter(|&&n| n > 0).count() <= 1 {
                    break;
                }
                redraws += 1;
                if redraws > MAX_REDRAWS {
                    return Err(Error::Invariant(
                        "could not avoid simultaneous jumps; refine the grid".into(),
                    ));
                }
            }
            for k in 0..jumps {
                drv.dp[k][i] = counts[k];
                drv.h[k][i] = c.h[k];
            }
        }
        step_accounts(cfg, &c, &mut state, &drv, i, dt)?;
    }
    Ok(drv)
}

fn check_drivers(cfg: &MarketConfig, drv: &Drivers) -> Result<()> {
    if drv.m != cfg.m || drv.d != cfg.d {
        return Err(invalid("drivers were simulated for a different market"));
    }
    Ok(())
}

/// Replays the account paths `X^0, …, X^d` from recorded drivers.
pub fn simulate_accounts(cfg: &MarketConfig, drv: &Drivers) -> Result<Vec<Vec<f64>>> {
    check_drivers(cfg, drv)?;
    let n = drv.grid.len();
    let mut paths: Vec<Vec<f64>> = cfg
        .x0
        .iter()
        .map(|&x| {
            let mut p = Vec::with_capacity(n);
            p.push(x);
            p
        })
        .collect();
    let mut state = cfg.x0.clone();
    for i in 0..drv.grid.steps() {
        let c = cfg.coefficients(drv.grid.times()[i], &state)?;
        step_accounts(cfg, &c, &mut state, drv, i, drv.grid.dt(i))?;
        for (p, &x) in paths.iter_mut().zip(&state) {
            p.push(x);
        }
    }
    Ok(paths)
}

/// Generic replay of a wealth process with exposures chosen per step.
fn replay_wealth(
    cfg: &MarketConfig,
    drv: &Drivers,
    x0: f64,
    mut exposures: impl FnMut(f64, &[f64], &Coefficients) -> Result<DVector<f64>>,
) -> Result<Vec<f64>> {
    check_drivers(cfg, drv)?;
    let mut state = cfg.x0.clone();
    let mut x = x0;
    let mut path = Vec::with_capacity(drv.grid.len());
    path.push(x);
    for i in 0..drv.grid.steps() {
        let t = drv.grid.times()[i];
        let dt = drv.grid.dt(i);
        let c = cfg.coefficients(t, &state)?;
        let v = exposures(t, &state, &c)?;
        x *= log_step(cfg.m, &c, &v, drv, i, dt)?.exp();
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Invariant(format!("wealth left (0, ∞) at step {i}: {x}")));
        }
        path.push(x);
        step_accounts(cfg, &c, &mut state, drv, i, dt)?;
    }
    Ok(path)
}

/// The growth optimal portfolio started at `x0`.
pub fn simulate_gop(cfg: &MarketConfig, drv: &Drivers, x0: f64) -> Result<Vec<f64>> {
    replay_wealth(cfg, drv, x0, |_, _, c| Ok(gop_exposures(cfg.m, c)))
}

/// A self-financing portfolio started at `x0` that holds fractions given by
/// `strategy`.
pub fn evolve_portfolio(cfg: &MarketConfig, drv: &Drivers, strategy: &Strategy, x0: f64) -> Result<Vec<f64>> {
    replay_wealth(cfg, drv, x0, |t, state, c| {
        let pi = strategy.fractions(t, state)?;
        if pi.len() != cfg.d + 1 {
            return Err(invalid(format!(
                "strategy returned {} fractions, expected {}",
                pi.len(),
                cfg.d + 1
            )));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("fractions sum to {sum} at t = {t}, not 1")));
        }
        let risky = DVector::from_column_slice(&pi[1..]);
        Ok(c.b.transpose() * risky)
    })
}

/// Drivers together with everything derived from them.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub grid: TimeGrid,
    /// Cumulative `W^k`, one path per Wiener driver.
    pub wiener: Vec<Vec<f64>>,
    /// Cumulative counts `p^k`, one path per jump driver.
    pub jumps: Vec<Vec<u32>>,
    /// Cumulative normalized jump martingales `q^k`.
    pub q: Vec<Vec<f64>>,
    pub accounts: Vec<Vec<f64>>,
    pub gop: Vec<f64>,
    /// `θ^k` at each grid point.
    pub theta: Vec<Vec<f64>>,
    pub drivers: Drivers,
}

impl PathBundle {
    pub fn simulate<R: Rng + ?Sized>(cfg: &MarketConfig, grid: &TimeGrid, rng: &mut R) -> Result<Self> {
        let drivers = simulate_drivers(cfg, grid, rng)?;
        Self::from_drivers(cfg, drivers)
    }

    pub fn from_drivers(cfg: &MarketConfig, drivers: Drivers) -> Result<Self> {
        let accounts = simulate_accounts(cfg, &drivers)?;
        let gop = simulate_gop(cfg, &drivers, 1.0)?;
        let grid = drivers.grid.clone();
        let cumsum = |xs: &[f64]| {
            let mut acc = 0.0;
            std::iter::once(0.0)
                .chain(xs.iter().map(|x| {
                    acc += x;
                    acc
                }))
                .collect::<Vec<f64>>()
        };
        let wiener = drivers.dw.iter().map(|w| cumsum(w)).collect();
        let mut jumps = Vec::new();
        let mut q = Vec::new();
        for (counts, hs) in drivers.dp.iter().zip(&drivers.h) {
            let mut p = vec![0u32];
            let mut qq = vec![0.0];
            for (i, (&n, &hk)) in counts.iter().zip(hs).enumerate() {
                p.push(p[i] + n);
                qq.push(qq[i] + (n as f64 - hk * grid.dt(i)) / hk.sqrt());
            }
            jumps.push(p);
            q.push(qq);
        }
        let mut theta = vec![Vec::with_capacity(grid.len()); cfg.d];
        for i in 0..grid.len() {
            let state: Vec<f64> = accounts.iter().map(|p| p[i]).collect();
            let c = cfg.coefficients(grid.times()[i], &state)?;
            for (k, th) in theta.iter_mut().enumerate() {
                th.push(c.theta[k]);
            }
        }
        Ok(PathBundle {
            grid,
            wiener,
            jumps,
            q,
            accounts,
            gop,
            theta,
            drivers,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;
    use nalgebra::DMatrix;

    fn grid(t: f64, dt: f64) -> TimeGrid {
        TimeGrid::uniform(t, dt).unwrap()
    }

    #[test]
    fn deterministic_savings_account() {
        let cfg = MarketConfig::black_scholes(0.03, 0.03, 1e-300, [2.0, 1.0]).unwrap();
        let g = grid(1.0, 0.01);
        let drv = simulate_drivers(&cfg, &g, &mut RngStream::new(1, 0).rng()).unwrap();
        let acc = simulate_accounts(&cfg, &drv).unwrap();
        assert!((acc[0].last().unwrap() - 2.0 * 0.03f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn pure_jump_account_matches_closed_form() {
        let (r, a, b, h) = (0.01, -0.05, -0.3, 2.0);
        let cfg = MarketConfig::constant(
            0,
            1,
            r,
            vec![a],
            DMatrix::from_element(1, 1, b),
            vec![h],
            vec![1.0, 1.5],
        )
        .unwrap();
        let g = grid(3.0, 0.01);
        let drv = simulate_drivers(&cfg, &g, &mut RngStream::new(2, 0).rng()).unwrap();
        let acc = simulate_accounts(&cfg, &drv).unwrap();
        let mut p = 0u32;
        for i in 0..g.steps() {
            p += drv.dp[0][i];
            let t = g.times()[i + 1];
            let exact = 1.5 * ((a - b * h.sqrt()) * t).exp() * (1.0 + b / h.sqrt()).powi(p as i32);
            assert!((acc[1][i + 1] - exact).abs() <= 1e-10 * exact);
        }
        assert!(p > 0);
    }

    #[test]
    fn gop_matches_closed_form_and_replication() {
        let (r, a, s) = (0.02, 0.08, 0.25);
        let theta = (a - r) / s;
        let cfg = MarketConfig::black_scholes(r, a, s, [1.0, 1.0]).unwrap();
        let g = grid(2.0, 0.001);
        let bundle = PathBundle::simulate(&cfg, &g, &mut RngStream::new(3, 0).rng()).unwrap();
        for (i, &t) in g.times().iter().enumerate() {
            let exact = (r * t + theta * bundle.wiener[0][i] + 0.5 * theta * theta * t).exp();
            assert!((bundle.gop[i] - exact).abs() <= 1e-10 * exact);
        }
        let rep = evolve_portfolio(&cfg, &bundle.drivers, &Strategy::gop_replicating(&cfg), 1.0).unwrap();
        for (x, y) in rep.iter().zip(&bundle.gop) {
            assert!((x - y).abs() < 1e-10 * y);
        }
    }

    #[test]
    fn single_account_strategies_reproduce_accounts() {
        let b = DMatrix::from_row_slice(2, 2, &[0.2, -0.1, 0.05, -0.4]);
        let cfg = MarketConfig::constant(1, 2, 0.01, vec![0.03, -0.02], b, vec![1.5], vec![1.0, 1.0, 2.0]).unwrap();
        let g = grid(2.0, 0.01);
        let bundle = PathBundle::simulate(&cfg, &g, &mut RngStream::new(4, 0).rng()).unwrap();
        for j in 0..=2 {
            let x0 = cfg.x0[j];
            let p = evolve_portfolio(&cfg, &bundle.drivers, &Strategy::single(2, j), x0).unwrap();
            for (x, y) in p.iter().zip(&bundle.accounts[j]) {
                assert!((x - y).abs() <= 1e-10 * y);
            }
        }
        let rep = evolve_portfolio(&cfg, &bundle.drivers, &Strategy::gop_replicating(&cfg), 1.0).unwrap();
        for (x, y) in rep.iter().zip(&bundle.gop) {
            assert!((x - y).abs() < 1e-9 * y);
        }
    }

    #[test]
    fn fraction_sum_is_enforced() {
        let cfg = MarketConfig::black_scholes(0.01, 0.05, 0.2, [1.0, 1.0]).unwrap();
        let g = grid(1.0, 0.1);
        let drv = simulate_drivers(&cfg, &g, &mut RngStream::new(5, 0).rng()).unwrap();
        assert!(evolve_portfolio(&cfg, &drv, &Strategy::constant(vec![0.5, 0.6]), 1.0).is_err());
    }

    #[test]
    fn simultaneous_jumps_are_redrawn() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![-0.2, -0.3]));
        let cfg = MarketConfig::constant(0, 2, 0.0, vec![-0.1, -0.1], b, vec![3.0, 3.0], vec![1.0; 3]).unwrap();
        let g = grid(5.0, 0.1);
        let drv = simulate_drivers(&cfg, &g, &mut RngStream::new(6, 0).rng()).unwrap();
        for i in 0..g.steps() {
            assert!(drv.dp[0][i] == 0 || drv.dp[1][i] == 0);
        }
    }

    #[test]
    fn tiny_intensity_gives_no_jumps() {
        let cfg = MarketConfig::constant(
            0,
            1,
            0.0,
            vec![-1e-9],
            DMatrix::from_element(1, 1, -5e-5),
            vec![1e-8],
            vec![1.0, 1.0],
        )
        .unwrap();
        let g = grid(1.0, 0.01);
        let drv = simulate_drivers(&cfg, &g, &mut RngStream::new(7, 0).rng()).unwrap();
        assert_eq!(drv.dp[0].iter().sum::<u32>(), 0);
    }
}
