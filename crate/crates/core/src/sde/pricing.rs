use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::grid::TimeGrid;
use crate::error::{invalid, Result};
use crate::numerics::RngStream;
use crate::path_stats::{self, HonestTime, DEFAULT_EPSILON};

/// A benchmarked portfolio path with its running statistics.
#[derive(Debug, Clone)]
pub struct BenchmarkedPath {
    pub grid: TimeGrid,
    pub n: Vec<f64>,
    pub sigma: Vec<f64>,
    pub i_min: Vec<f64>,
    pub z: Vec<f64>,
    /// Present when `Z_T` is below the default tail threshold.
    pub g_hat: Option<HonestTime>,
}

impl BenchmarkedPath {
    pub fn from_values(grid: TimeGrid, n: Vec<f64>) -> Result<Self> {
        if grid.len() != n.len() {
            return Err(invalid(format!(
                "grid has {} points but path has {}",
                grid.len(),
                n.len()
            )));
        }
        let (sigma, i_min) = path_stats::running_extrema(&n)?;
        let z = path_stats::azema_process(&n, &sigma)?;
        let g_hat = path_stats::extract_honest_time(grid.times(), &n, &sigma, DEFAULT_EPSILON).ok();
        Ok(BenchmarkedPath {
            grid,
            n,
            sigma,
            i_min,
            z,
            g_hat,
        })
    }
}

/// `N^δ = X^δ / X^{δ*}` on a common grid.
pub fn benchmark(grid: &TimeGrid, portfolio: &[f64], gop: &[f64]) -> Result<BenchmarkedPath> {
    if portfolio.len() != gop.len() || gop.len() != grid.len() {
        return Err(invalid("portfolio, GOP and grid lengths differ"));
    }
    let n = portfolio
        .iter()
        .zip(gop)
        .map(|(x, g)| if x == g { 1.0 } else { x / g })
        .collect();
    BenchmarkedPath::from_values(grid.clone(), n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Price {
    pub price: f64,
    pub std_error: f64,
}

/// Real-world price `X^{δ*}_t · E(H_τ / X^{δ*}_τ)` from benchmarked payoff
/// samples.
pub fn real_world_price(benchmarked_payoffs: &[f64], gop_t: f64) -> Result<Price> {
    let n = benchmarked_payoffs.len();
    if n == 0 {
        return Err(crate::numerics::NumericsError::EmptySample.into());
    }
    let mean = benchmarked_payoffs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        benchmarked_payoffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok(Price {
        price: gop_t * mean,
        std_error: gop_t * (var / n as f64).sqrt(),
    })
}

/// Minimal market model: the benchmarked savings account is `x / R²_{φ(t)}`
/// for a four-dimensional squared Bessel process `R²` with `R²_0 = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmmParams {
    pub alpha0: f64,
    pub eta: f64,
    pub x: f64,
}

impl Default for MmmParams {
    fn default() -> Self {
        MmmParams {
            alpha0: 0.043,
            eta: 0.052,
            x: 1.0,
        }
    }
}

impl MmmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.eta > 0.0 && self.x > 0.0) {
            return Err(invalid(format!("MMM needs alpha0, eta, x > 0, got {self:?}")));
        }
        Ok(())
    }

    /// `φ(t) = α₀/(4η)·(e^{ηt} − 1)`.
    pub fn phi(&self, t: f64) -> f64 {
        self.alpha0 / (4.0 * self.eta) * (self.eta * t).exp_m1()
    }

    pub fn phi_inverse(&self, s: f64) -> f64 {
        (4.0 * self.eta * s / self.alpha0).ln_1p() / self.eta
    }
}

/// One MMM path on `grid`: the squared radius of a 4-dimensional Brownian
/// motion in `φ`-time, sampled exactly at the grid times.
pub fn simulate_mmm_path<R: Rng + ?Sized>(params: &MmmParams, grid: &TimeGrid, rng: &mut R) -> Result<BenchmarkedPath> {
    params.validate()?;
    let mut coords = [params.x.sqrt(), 0.0, 0.0, 0.0];
    let mut n = Vec::with_capacity(grid.len());
    n.push(1.0);
    for w in grid.times().windows(2) {
        let dphi = params.phi(w[1]) - params.phi(w[0]);
        let sd = dphi.sqrt();
        for c in coords.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *c += sd * z;
        }
        let r2: f64 = coords.iter().map(|c| c * c).sum();
        n.push(params.x / r2);
    }
    BenchmarkedPath::from_values(grid.clone(), n)
}

/// `n_paths` MMM paths, path `i` drawn from stream `(seed, i)`.
pub fn simulate_mmm_benchmarked(
    params: &MmmParams,
    grid: &TimeGrid,
    seed: u64,
    n_paths: usize,
) -> Result<Vec<BenchmarkedPath>> {
    (0..n_paths)
        .into_par_iter()
        .map(|i| simulate_mmm_path(params, grid, &mut RngStream::new(seed, i as u64).rng()))
        .collect()
}
