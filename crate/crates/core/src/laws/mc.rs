//! Monte Carlo estimators for honest-time laws.

use rand_chacha::ChaCha8Rng;

use super::gbm::{sample_gbm_honest_time, GbmParams};
use crate::error::{invalid, Result};
use crate::numerics::Estimate;
use crate::sde::{par_paths, BesselStream, GbmStream, MmmParams, MmmStream, RunningStats, StreamingModel};

const FAMILY_EXACT: u64 = 0x4c41_5701;
const FAMILY_PATHS: u64 = 0x4c41_5702;
const FAMILY_LOGMAX: u64 = 0x4c41_5703;

/// Benchmarked models that can be simulated path by path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathModel {
    /// `dt` is the calendar step.
    Gbm { sigma: f64, dt: f64 },
    /// `log_variance` is the per-step variance of `ln R²`.
    Bessel { delta: f64, x: f64, log_variance: f64 },
    Mmm {
        params: MmmParams,
        log_variance: f64,
        max_dt: f64,
    },
}

impl PathModel {
    pub fn stream(&self) -> Result<Box<dyn StreamingModel>> {
        Ok(match *self {
            PathModel::Gbm { sigma, dt } => Box::new(GbmStream::new(sigma, dt)?),
            PathModel::Bessel { delta, x, log_variance } => Box::new(BesselStream::new(delta, x, log_variance)?),
            PathModel::Mmm {
                params,
                log_variance,
                max_dt,
            } => Box::new(MmmStream::new(params, log_variance, max_dt)?),
        })
    }

    /// The same model at half the step size.
    pub fn refined(&self) -> PathModel {
        match *self {
            PathModel::Gbm { sigma, dt } => PathModel::Gbm { sigma, dt: 0.5 * dt },
            PathModel::Bessel { delta, x, log_variance } => PathModel::Bessel {
                delta,
                x,
                log_variance: 0.5 * log_variance,
            },
            PathModel::Mmm {
                params,
                log_variance,
                max_dt,
            } => PathModel::Mmm {
                params,
                log_variance: 0.5 * log_variance,
                max_dt: 0.5 * max_dt,
            },
        }
    }
}

/// Exact draws of the GBM honest time.
pub fn sample_gbm_honest_times(p: &GbmParams, n: usize, seed: u64) -> Vec<f64> {
    par_paths(n, seed, FAMILY_EXACT, |_, rng: &mut ChaCha8Rng| {
        sample_gbm_honest_time(p, rng)
    })
}

/// Outcome of one path run until `Z_t ≤ ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathHonestTime {
    pub g_hat: f64,
    pub sigma: f64,
    pub z_final: f64,
    pub horizon: f64,
    pub reached_tail: bool,
}

/// Last-maximum times of simulated paths, each run until `Z_t ≤ ε` or `t_max`.
pub fn path_honest_times(
    model: &PathModel,
    n: usize,
    seed: u64,
    epsilon: f64,
    t_max: f64,
) -> Result<Vec<PathHonestTime>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let stream = model.stream()?;
    Ok(par_paths(n, seed, FAMILY_PATHS, |_, rng| {
        let mut stats = RunningStats::new(Some(epsilon), Vec::new());
        stream.run(t_max, rng, &mut stats);
        PathHonestTime {
            g_hat: stats.g,
            sigma: stats.sigma,
            z_final: stats.z(),
            horizon: stats.last_t,
            reached_tail: stats.reached_tail(),
        }
    }))
}

/// `E e^{−λg}` estimated from draws of `g`.
pub fn empirical_laplace(samples: &[f64], lambda: f64) -> Estimate {
    let vals: Vec<f64> = samples.iter().map(|g| (-lambda * g).exp()).collect();
    Estimate::from_samples(&vals)
}

/// Monte Carlo value of `P(g ≤ t) = E ln(Σ_t/N_0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogmaxCdf {
    pub estimate: Estimate,
    /// The estimate clipped to `[0, 1]`.
    pub reported: f64,
    pub clipped: bool,
}

pub fn cdf_via_logmax(model: &PathModel, t: f64, n_paths: usize, seed: u64) -> Result<LogmaxCdf> {
    if !(t >= 0.0) || n_paths == 0 {
        return Err(invalid(format!(
            "need t ≥ 0 and at least one path, got t = {t}, n = {n_paths}"
        )));
    }
    let stream = model.stream()?;
    let n0 = stream.n0();
    let logs = if t == 0.0 {
        vec![0.0; n_paths]
    } else {
        par_paths(n_paths, seed, FAMILY_LOGMAX, |_, rng| {
            let mut stats = RunningStats::new(None, Vec::new());
            stream.run(t, rng, &mut stats);
            (stats.sigma / n0).ln()
        })
    };
    let estimate = Estimate::from_samples(&logs);
    let reported = estimate.mean.clamp(0.0, 1.0);
    Ok(LogmaxCdf {
        estimate,
        reported,
        clipped: reported != estimate.mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{gbm_laplace, honest_time_cdf, LawModel};
    use crate::numerics::{ks_critical_1pct, ks_statistic};

    #[test]
    fn exact_sampler_laplace() {
        let p = GbmParams::new(0.2).unwrap();
        let g = sample_gbm_honest_times(&p, 100_000, 11);
        for mult in [0.5, 1.5, 4.0] {
            let lambda = mult * 0.04;
            let e = empirical_laplace(&g, lambda);
            assert!(
                e.agrees_with(gbm_laplace(&p, lambda).unwrap(), 4.0, 0.0),
                "λ={lambda}: {e:?}"
            );
        }
    }

    #[test]
    fn exact_sampler_matches_inverted_cdf() {
        let p = GbmParams::new(0.2).unwrap();
        let g = sample_gbm_honest_times(&p, 10_000, 3);
        let model = LawModel::Gbm(p);
        let d = ks_statistic(&g, |t| honest_time_cdf(&model, t).unwrap()).unwrap();
        assert!(d < ks_critical_1pct(10_000), "KS {d}");
    }

    #[test]
    fn logmax_at_zero_is_exact() {
        let m = PathModel::Gbm { sigma: 0.2, dt: 0.01 };
        let r = cdf_via_logmax(&m, 0.0, 10, 1).unwrap();
        assert_eq!((r.reported, r.estimate.std_error), (0.0, 0.0));
    }

    #[test]
    fn logmax_matches_inverted_cdf() {
        let m = PathModel::Gbm { sigma: 0.2, dt: 2e-3 };
        let r = cdf_via_logmax(&m, 5.0, 4000, 5).unwrap();
        let exact = honest_time_cdf(&LawModel::Gbm(GbmParams::new(0.2).unwrap()), 5.0).unwrap();
        let tol = (4.0 * r.estimate.std_error).max(0.01);
        assert!((r.reported - exact).abs() < tol, "{} vs {exact}", r.reported);
    }
}
