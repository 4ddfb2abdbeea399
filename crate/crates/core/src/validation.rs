//! The acceptance suite: one function per criterion, each returning the
//! checks it ran with observed values, tolerances and verdicts.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::hedging::{hedge_backtest, put_on_max_value};
use crate::laws::{
    bessel3_density, bessel_laplace, diffusion_laplace, empirical_laplace, gbm_hitting_laplace, gbm_laplace,
    honest_time_cdf, law_via_hitting, sample_gbm_honest_times, solve_phi_lambda, BesselParams, GbmParams, LawModel,
    ScaleDiffusion,
};
use crate::maxima::{
    ay_integral_replay, azema_yor_path, azema_yor_value, conditional_max_expectation,
    conditional_max_expectation_sum_form, MaxPayoffSpec,
};
use crate::numerics::{integrate, ks_critical_1pct, ks_statistic, Estimate, RngStream};
use crate::path_stats::running_extrema;
use crate::sde::{
    benchmark, par_paths, simulate_accounts, simulate_drivers, simulate_mmm_benchmarked, BenchmarkedPath, BesselStream,
    Control, CrossingSink, GbmStream, MarketConfig, MmmParams, MmmStream, PathBundle, Recorder, RunningStats,
    StreamingModel, TimeGrid,
};

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "Doob maximal identity"),
    (2, "Azema process"),
    (3, "martingale N/Sigma + ln Sigma"),
    (4, "conditional law of the global maximum"),
    (5, "Azema-Yor replay"),
    (6, "put on the maximum: price and hedge"),
    (7, "GBM honest-time law"),
    (8, "Bessel honest-time laws"),
    (9, "general diffusion formula"),
    (10, "market engine oracles"),
    (11, "determinism"),
];

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            observed,
            tolerance: format!("<= {bound:.6e}"),
            pass: observed <= bound,
        }
    }

    fn near(name: impl Into<String>, observed: f64, target: f64, tol: f64) -> Check {
        Check {
            name: name.into(),
            observed,
            tolerance: format!("{target:.10} +/- {tol:.3e}"),
            pass: (observed - target).abs() <= tol,
        }
    }

    fn within_se(name: impl Into<String>, est: &Estimate, target: f64, k: f64) -> Check {
        let tol = k * est.std_error;
        Check {
            name: name.into(),
            observed: est.mean,
            tolerance: format!("{target:.6} +/- {k}se ({tol:.3e})"),
            pass: (est.mean - target).abs() <= tol,
        }
    }

    fn ratio(name: impl Into<String>, observed: f64, target: f64, rel: f64) -> Check {
        Check {
            name: name.into(),
            observed,
            tolerance: format!("{target:.4} +/- {:.0}%", rel * 100.0),
            pass: (observed / target - 1.0).abs() <= rel,
        }
    }

    fn flag(name: impl Into<String>, ok: bool, observed: f64) -> Check {
        Check {
            name: name.into(),
            observed,
            tolerance: "must hold".into(),
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// One line: `criterion N (title): PASS|FAIL [failing checks]`.
    pub fn summary_line(&self) -> String {
        let failing: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} = {:.6e} (want {})", c.name, c.observed, c.tolerance))
            .collect();
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        if failing.is_empty() {
            format!(
                "criterion {:>2} ({}): {verdict} [{} checks, {:.1}s]",
                self.id,
                self.title,
                self.checks.len(),
                self.seconds
            )
        } else {
            format!(
                "criterion {:>2} ({}): {verdict} [{}]",
                self.id,
                self.title,
                failing.join("; ")
            )
        }
    }
}

/// Knobs for the suite. The defaults are the acceptance settings;
/// `path_scale < 1` gives a quicker smoke run with looser statistics and
/// `dt_scale > 1` coarsens every step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    pub path_scale: f64,
    pub dt_scale: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            seed: 20_240_601,
            path_scale: 1.0,
            dt_scale: 1.0,
        }
    }
}

impl ValidationOptions {
    fn paths(&self, n: usize) -> usize {
        ((n as f64 * self.path_scale).ceil() as usize).max(50)
    }

    fn dt(&self, dt: f64) -> f64 {
        dt * self.dt_scale
    }
}

pub fn run_criterion(id: u8, opts: &ValidationOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let checks = match id {
        1 => doob_identity(opts)?,
        2 => azema_process(opts)?,
        3 => log_max_martingale(opts)?,
        4 => conditional_max_law(opts)?,
        5 => azema_yor_replay(opts)?,
        6 => put_price_and_hedge(opts)?,
        7 => gbm_law(opts)?,
        8 => bessel_laws(opts)?,
        9 => diffusion_formula()?,
        10 => market_engine(opts)?,
        11 => determinism(opts)?,
        _ => return Err(crate::error::invalid(format!("no acceptance criterion {id}"))),
    };
    let title = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("");
    Ok(CriterionReport {
        id,
        title: title.into(),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs the listed criteria; a criterion that errors is reported as a failed check.
pub fn run_suite(ids: &[u8], opts: &ValidationOptions) -> Vec<CriterionReport> {
    ids.iter()
        .map(|&id| {
            run_criterion(id, opts).unwrap_or_else(|e| CriterionReport {
                id,
                title: CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("").into(),
                checks: vec![Check {
                    name: format!("error: {e}"),
                    observed: f64::NAN,
                    tolerance: "no error".into(),
                    pass: false,
                }],
                seconds: 0.0,
            })
        })
        .collect()
}

const GBM_SIGMA: f64 = 0.2;
const T_LONG: f64 = 1e5;

fn gbm_stream(opts: &ValidationOptions, dt: f64) -> Result<GbmStream> {
    GbmStream::new(GBM_SIGMA, opts.dt(dt))
}

fn mmm_stream(opts: &ValidationOptions) -> Result<MmmStream> {
    MmmStream::new(MmmParams::default(), opts.dt(2e-4), 0.05)
}

fn tail_stats(model: &dyn StreamingModel, n: usize, seed: u64, family: u64, eps: f64) -> Vec<RunningStats> {
    par_paths(n, seed, family, |_, rng| {
        let mut s = RunningStats::new(Some(eps), Vec::new());
        model.run(T_LONG, rng, &mut s);
        s
    })
}

fn doob_identity(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let start = Instant::now();
    let n = opts.paths(10_000);
    let bound = ks_critical_1pct(n) + 0.01;
    let mut checks = Vec::new();
    let models: [(&str, Box<dyn StreamingModel>); 3] = [
        ("gbm", Box::new(gbm_stream(opts, 1e-3)?.with_gap_steps())),
        ("mmm", Box::new(mmm_stream(opts)?.with_gap_steps())),
        (
            "bessel4",
            Box::new(BesselStream::new(4.0, 1.0, opts.dt(2e-4))?.with_gap_steps()),
        ),
    ];
    for (k, (label, model)) in models.iter().enumerate() {
        let stats = tail_stats(model.as_ref(), n, opts.seed, 0x0100 + k as u64, 0.01);
        let u: Vec<f64> = stats.iter().map(|s| model.n0() / s.sigma).collect();
        let d = ks_statistic(&u, |x| x.clamp(0.0, 1.0))?;
        checks.push(Check::at_most(format!("{label}: KS(1/Sigma_T, U(0,1))"), d, bound));
        let reached = stats.iter().filter(|s| s.reached_tail()).count() as f64 / n as f64;
        checks.push(Check::flag(
            format!("{label}: all paths reached Z_T < 0.01"),
            reached == 1.0,
            reached,
        ));
    }
    checks.push(Check::at_most("runtime seconds", start.elapsed().as_secs_f64(), 60.0));
    Ok(checks)
}

/// States `(t, N_t, Σ_t)` with `Z_t` away from 0 and 1, read off one outer path.
fn sample_states(
    model: &dyn StreamingModel,
    seed: u64,
    family: u64,
    count: usize,
    spacing: f64,
) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for attempt in 0..64u64 {
        let mut rng = RngStream::family(seed, family, attempt).rng();
        let mut rec = Recorder::default();
        model.run(40.0 * spacing * count as f64, &mut rng, &mut rec);
        let (sigma, _) = running_extrema(&rec.values).unwrap_or_default();
        let mut next_t = spacing;
        for i in 0..rec.values.len() {
            let z = rec.values[i] / sigma[i];
            if rec.times[i] >= next_t && (0.08..=0.9).contains(&z) {
                out.push((rec.times[i], rec.values[i], sigma[i]));
                next_t = rec.times[i] + spacing;
                if out.len() == count {
                    return out;
                }
            }
        }
    }
    out
}

fn azema_process(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let start = Instant::now();
    let inner = opts.paths(4000);
    // outer paths on fixed steps, continuations with gap-adaptive steps
    type Pair = (Box<dyn StreamingModel>, Box<dyn StreamingModel>);
    let models: [(&str, Pair, f64); 2] = [
        (
            "gbm",
            (
                Box::new(gbm_stream(opts, 1e-3)?),
                Box::new(gbm_stream(opts, 1e-3)?.with_gap_steps()),
            ),
            2.0,
        ),
        (
            "mmm",
            (
                Box::new(mmm_stream(opts)?),
                Box::new(mmm_stream(opts)?.with_gap_steps()),
            ),
            5.0,
        ),
    ];
    let mut checks = Vec::new();
    for (k, (label, (outer, model), spacing)) in models.iter().enumerate() {
        let states = sample_states(outer.as_ref(), opts.seed, 0x0200 + k as u64, 5, *spacing);
        checks.push(Check::flag(
            format!("{label}: five states sampled"),
            states.len() == 5,
            states.len() as f64,
        ));
        for (j, &(t, n_t, s_t)) in states.iter().enumerate() {
            let hits: Vec<f64> = par_paths(inner, opts.seed, 0x0210 + 16 * k as u64 + j as u64, |_, rng| {
                let mut sink = CrossingSink::new(s_t, 0.01 * s_t);
                model.run_from(t, n_t, f64::INFINITY, rng, &mut sink);
                if sink.crossed {
                    1.0
                } else {
                    0.0
                }
            });
            let est = Estimate::from_samples(&hits);
            let z = n_t / s_t;
            checks.push(Check::within_se(
                format!("{label}: P(new max | t={t:.2}, Z={z:.3})"),
                &est,
                z,
                4.0,
            ));
        }
    }
    checks.push(Check::at_most("runtime seconds", start.elapsed().as_secs_f64(), 120.0));
    Ok(checks)
}

fn log_max_martingale(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let n = opts.paths(10_000);
    let horizon = 20.0;
    let times = vec![horizon / 4.0, horizon / 2.0, horizon];
    let model = gbm_stream(opts, 1e-3)?;
    let snaps = par_paths(n, opts.seed, 0x0300, |_, rng| {
        let mut s = RunningStats::new(None, times.clone());
        model.run(horizon, rng, &mut s);
        s.snapshots
    });
    let mut checks = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let vals: Vec<f64> = snaps.iter().map(|s| s[k].n / s[k].sigma + s[k].sigma.ln()).collect();
        let est = Estimate::from_samples(&vals);
        checks.push(Check::within_se(
            format!("E[Z_t + ln Sigma_t] at t={t}"),
            &est,
            1.0,
            4.0,
        ));
    }
    Ok(checks)
}

fn conditional_max_law(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let payoffs = [
        MaxPayoffSpec::put(2.5)?,
        MaxPayoffSpec::indicator(2.0)?,
        MaxPayoffSpec::log(),
        MaxPayoffSpec::power(1.3, 0.5)?,
        MaxPayoffSpec::constant(1.7),
    ];
    let mut worst: f64 = 0.0;
    for spec in &payoffs {
        for &s in &[1.0, 1.2, 2.0, 2.5, 3.7] {
            for &z in &[1.0, 0.75, 0.4, 0.1, 0.01] {
                let n_t = z * s;
                let a = conditional_max_expectation(spec, n_t, s)?;
                let b = conditional_max_expectation_sum_form(spec, n_t, s)?;
                let scale = a.abs().max(1.0);
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    let mut checks = vec![Check::at_most("max |closed form - sum form| (relative)", worst, 1e-12)];

    let model = gbm_stream(opts, 1e-3)?;
    let inner = opts.paths(4000);
    let states = sample_states(&model, opts.seed, 0x0400, 3, 3.0);
    checks.push(Check::flag(
        "three states sampled",
        states.len() == 3,
        states.len() as f64,
    ));
    for (j, &(t, n_t, s_t)) in states.iter().enumerate() {
        let maxima: Vec<f64> = par_paths(inner, opts.seed, 0x0410 + j as u64, |_, rng| {
            let mut sigma = s_t;
            let mut sink = |_t: f64, n: f64| {
                sigma = sigma.max(n);
                if n <= 0.01 * sigma {
                    Control::Stop
                } else {
                    Control::Continue
                }
            };
            model.run_from(t, n_t, f64::INFINITY, rng, &mut sink);
            sigma
        });
        for spec in &payoffs[..3] {
            let vals: Vec<f64> = maxima.iter().map(|&m| spec.f(m)).collect();
            let est = Estimate::from_samples(&vals);
            let target = conditional_max_expectation(spec, n_t, s_t)?;
            checks.push(Check::within_se(
                format!("{}: E f(Sigma_inf) | N={n_t:.3}, Sigma={s_t:.3}", spec.label),
                &est,
                target,
                4.0,
            ));
        }
    }
    Ok(checks)
}

/// Log-GBM increments at `dt` for one path, with the coarse path obtained
/// by summing pairs.
fn gbm_pair(sigma: f64, dt: f64, steps: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let vol = 2.0 * sigma * dt.sqrt();
    let drift = -2.0 * sigma * sigma * dt;
    let mut fine = Vec::with_capacity(steps + 1);
    let mut log_n = 0.0;
    fine.push(1.0);
    for _ in 0..steps {
        let z: f64 = rng.sample(StandardNormal);
        log_n += drift + vol * z;
        fine.push(f64::exp(log_n));
    }
    let coarse = fine.iter().step_by(2).copied().collect();
    (fine, coarse)
}

fn sup_replay_error(spec: &MaxPayoffSpec, n: &[f64]) -> Result<f64> {
    let (sigma, _) = running_extrema(n)?;
    let replay = ay_integral_replay(spec, n, &sigma)?;
    let exact = azema_yor_path(spec, n, &sigma)?;
    Ok(replay
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn azema_yor_replay(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let n = opts.paths(1000);
    let dt = opts.dt(1e-3);
    let horizon = 10.0;
    let steps = 2 * (horizon / (2.0 * dt)).round() as usize;
    let spec = MaxPayoffSpec::put(2.5)?;
    let errs: Vec<Result<(f64, f64)>> = par_paths(n, opts.seed, 0x0500, |_, rng| {
        let (fine, coarse) = gbm_pair(GBM_SIGMA, dt, steps, rng);
        Ok((sup_replay_error(&spec, &fine)?, sup_replay_error(&spec, &coarse)?))
    });
    let errs: Vec<(f64, f64)> = errs.into_iter().collect::<Result<_>>()?;
    let fine = errs.iter().map(|e| e.0).sum::<f64>() / n as f64;
    let coarse = errs.iter().map(|e| e.1).sum::<f64>() / n as f64;
    let ay0 = azema_yor_value(&spec, 1.0, 1.0)?;
    Ok(vec![
        Check::ratio("mean sup error ratio (dt / dt/2)", coarse / fine, SQRT2, 0.3),
        Check::flag("replay starts at F(Sigma_0)", ay0.is_finite(), ay0),
    ])
}

fn put_price_and_hedge(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let mut checks = vec![Check::near(
        "V_0 for K = 2.5",
        put_on_max_value(2.5, 1.0, 1.0)?,
        0.583_709_27,
        1e-12 + 0.5e-8,
    )];
    let exact = 1.5 - 2.5f64.ln();
    checks.push(Check::near(
        "V_0 vs (K-1) - ln K",
        put_on_max_value(2.5, 1.0, 1.0)?,
        exact,
        1e-12,
    ));

    let n = opts.paths(4000);
    let dt = opts.dt(5e-3);
    let horizon = 40.0;
    let steps = 2 * (horizon / (2.0 * dt)).round() as usize;
    let fine_grid = TimeGrid::uniform(steps as f64 * dt, dt)?;
    let coarse_grid = fine_grid.coarsen(2)?;
    let strike = 2.5;
    let rows: Vec<Result<(f64, f64, bool, bool)>> = par_paths(n, opts.seed, 0x0600, |_, rng| {
        let (fine, _) = gbm_pair(GBM_SIGMA, dt, steps, rng);
        let path = BenchmarkedPath::from_values(fine_grid.clone(), fine)?;
        let f = hedge_backtest(strike, &path, &fine_grid)?;
        let c = hedge_backtest(strike, &path, &coarse_grid)?;
        let absorbed_ok = |l: &crate::hedging::HedgeLedger| match l.absorbed_at {
            None => true,
            Some(k) => (k..l.wealth.len())
                .all(|i| l.units_in_asset[i] == 0.0 && l.benchmarked_value[i] == 0.0 && l.wealth[i] == l.wealth[k]),
        };
        Ok((
            f.terminal_tracking_error(),
            c.terminal_tracking_error(),
            absorbed_ok(&f) && absorbed_ok(&c),
            f.absorbed_at.is_some(),
        ))
    });
    let rows: Vec<(f64, f64, bool, bool)> = rows.into_iter().collect::<Result<_>>()?;
    let rms = |k: usize| {
        (rows
            .iter()
            .map(|r| if k == 0 { r.0 * r.0 } else { r.1 * r.1 })
            .sum::<f64>()
            / rows.len() as f64)
            .sqrt()
    };
    checks.push(Check::ratio(
        "RMS terminal tracking error ratio (dt / dt/2)",
        rms(1) / rms(0),
        SQRT2,
        0.3,
    ));
    let absorbed = rows.iter().filter(|r| r.3).count();
    let violations = rows.iter().filter(|r| !r.2).count();
    checks.push(Check::flag(
        format!("absorption holds on all {absorbed} absorbed paths"),
        violations == 0 && absorbed > 0,
        violations as f64,
    ));
    Ok(checks)
}

/// Last-maximum times from one GBM path at `dt` and at `2dt` (every other
/// point), run until the coarse `Z` falls below `eps`.
fn gbm_paired_honest_times(sigma: f64, dt: f64, eps: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let vol = 2.0 * sigma * dt.sqrt();
    let drift = -2.0 * sigma * sigma * dt;
    let (mut log_n, mut max_f, mut max_c) = (0.0f64, 0.0f64, 0.0f64);
    let (mut g_f, mut g_c) = (0.0, 0.0);
    let mut i = 0u64;
    loop {
        i += 1;
        let z: f64 = rng.sample(StandardNormal);
        log_n += drift + vol * z;
        let t = i as f64 * dt;
        if log_n >= max_f {
            max_f = log_n;
            g_f = t;
        }
        if i.is_multiple_of(2) {
            if log_n >= max_c {
                max_c = log_n;
                g_c = t;
            }
            if log_n - max_c <= eps.ln() {
                return (g_f, g_c);
            }
        }
    }
}

fn gbm_law(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let p = GbmParams::new(GBM_SIGMA)?;
    let mut worst: f64 = 0.0;
    for k in -4..=4 {
        let lambda = 0.04 * 3f64.powi(k);
        let chain = law_via_hitting(|a, l| gbm_hitting_laplace(&p, a, l), lambda)?;
        worst = worst.max((chain - gbm_laplace(&p, lambda)?).abs());
    }
    let mut checks = vec![Check::at_most("max |closed form - hitting-time chain|", worst, 1e-8)];
    let model = LawModel::Gbm(p);
    let cdf = |t: f64| honest_time_cdf(&model, t).unwrap_or(f64::NAN);
    let n = opts.paths(10_000);
    let crit = ks_critical_1pct(n);
    let exact = sample_gbm_honest_times(&p, n, opts.seed);
    checks.push(Check::at_most(
        "KS exact sampler vs inverted CDF",
        ks_statistic(&exact, cdf)?,
        crit,
    ));

    let dt = opts.dt(2.5e-3);
    let pairs = par_paths(n, opts.seed, 0x0700, |_, rng| {
        gbm_paired_honest_times(GBM_SIGMA, dt, 1e-3, rng)
    });
    let fine: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let coarse: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let d_f = ks_statistic(&fine, cdf)?;
    let d_c = ks_statistic(&coarse, cdf)?;
    let allowance = 0.01;
    checks.push(Check::at_most(
        format!("KS path g_hat (dt={:.1e}) vs inverted CDF", 2.0 * dt),
        d_c,
        crit + allowance,
    ));
    checks.push(Check::at_most(
        format!("KS path g_hat (dt={dt:.1e}) vs inverted CDF"),
        d_f,
        crit + allowance,
    ));
    checks.push(Check::at_most(
        "KS gap change under refinement (fine - coarse)",
        d_f - d_c,
        0.003,
    ));
    Ok(checks)
}

fn bessel_laws(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let p3 = BesselParams::new(3.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for lambda in [0.1, 0.5, 1.0, 2.0] {
        let q = integrate(
            |t| (-lambda * t).exp() * bessel3_density(1.0, t).unwrap_or(0.0),
            0.0,
            f64::INFINITY,
            1e-11,
        )?;
        worst = worst.max((q.value - bessel_laplace(&p3, lambda)?).abs());
    }
    let mass = integrate(|t| bessel3_density(1.0, t).unwrap_or(0.0), 0.0, f64::INFINITY, 1e-11)?.value;
    let mut checks = vec![
        Check::at_most("max |nu=1/2 transform - transform of density|", worst, 1e-6),
        Check::near("density mass", mass, 1.0, 1e-8),
    ];
    let n = opts.paths(10_000);
    let model = BesselStream::new(4.0, 1.0, opts.dt(1e-3))?;
    let g: Vec<f64> = tail_stats(&model, n, opts.seed, 0x0800, 1e-3)
        .iter()
        .map(|s| s.g)
        .collect();
    let p4 = BesselParams::new(4.0, 1.0)?;
    for lambda in [0.5, 1.0, 2.0] {
        let est = empirical_laplace(&g, lambda);
        checks.push(Check::within_se(
            format!("delta=4 E e^(-{lambda} g)"),
            &est,
            bessel_laplace(&p4, lambda)?,
            4.0,
        ));
    }
    Ok(checks)
}

fn diffusion_formula() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let probes: Vec<f64> = (0..=20).map(|i| 0.1 * 100f64.powf(i as f64 / 20.0)).collect();
    for delta in [2.5, 3.0, 4.0, 5.0] {
        let diff = ScaleDiffusion::squared_bessel(delta, 1.0)?;
        let p = BesselParams::new(delta, 1.0)?;
        for lambda in [0.1, 0.5, 1.0, 2.0] {
            worst = worst.max((diffusion_laplace(&diff, lambda)? - bessel_laplace(&p, lambda)?).abs());
            let phi = solve_phi_lambda(&diff, lambda, &probes)?;
            worst_res = worst_res.max(phi.residual(&diff, &probes)?);
        }
    }
    Ok(vec![
        Check::at_most("max |diffusion formula - Bessel transform|", worst, 1e-5),
        Check::at_most("max phi_lambda residual", worst_res, 1e-6),
    ])
}

fn market_engine(opts: &ValidationOptions) -> Result<Vec<Check>> {
    use nalgebra::DMatrix;
    let mut checks = Vec::new();
    let (r, a, s) = (0.02, 0.08, 0.25);
    let bs = MarketConfig::black_scholes(r, a, s, [1.0, 1.0])?;
    let grid = TimeGrid::uniform(1.0, opts.dt(0.01))?;
    let n = opts.paths(10_000);
    let terminal: Vec<Result<(f64, f64)>> = par_paths(n, opts.seed, 0x0a00, |_, rng| {
        let drv = simulate_drivers(&bs, &grid, rng)?;
        let b = PathBundle::from_drivers(&bs, drv)?;
        let last = grid.len() - 1;
        Ok((b.accounts[1][last], b.accounts[0][last] / b.gop[last]))
    });
    let terminal: Vec<(f64, f64)> = terminal.into_iter().collect::<Result<_>>()?;
    let x_t: Vec<f64> = terminal.iter().map(|v| v.0).collect();
    checks.push(Check::within_se(
        "Black-Scholes E[X_T] vs x e^(aT)",
        &Estimate::from_samples(&x_t),
        a.exp(),
        4.0,
    ));

    let (jr, ja, jb, jh) = (0.01, -0.05, -0.3, 2.0);
    let pj = MarketConfig::constant(
        0,
        1,
        jr,
        vec![ja],
        DMatrix::from_element(1, 1, jb),
        vec![jh],
        vec![1.0, 1.5],
    )?;
    let jgrid = TimeGrid::uniform(3.0, 0.01)?;
    let mut worst_jump: f64 = 0.0;
    let mut worst_gop: f64 = 0.0;
    let mut gop_exact_one = true;
    let theta = (a - r) / s;
    let ggrid = TimeGrid::uniform(2.0, 1e-3)?;
    for k in 0..20u64 {
        let mut rng = RngStream::family(opts.seed, 0x0a10, k).rng();
        let drv = simulate_drivers(&pj, &jgrid, &mut rng)?;
        let acc = simulate_accounts(&pj, &drv)?;
        let mut p = 0u32;
        for i in 0..jgrid.steps() {
            p += drv.dp[0][i];
            let t = jgrid.times()[i + 1];
            let exact = 1.5 * ((ja - jb * jh.sqrt()) * t).exp() * (1.0 + jb / jh.sqrt()).powi(p as i32);
            worst_jump = worst_jump.max((acc[1][i + 1] - exact).abs() / exact);
        }
        let bundle = PathBundle::simulate(&bs, &ggrid, &mut rng)?;
        for (i, &t) in ggrid.times().iter().enumerate() {
            let exact = (r * t + theta * bundle.wiener[0][i] + 0.5 * theta * theta * t).exp();
            worst_gop = worst_gop.max((bundle.gop[i] - exact).abs() / exact);
        }
        let bench = benchmark(&ggrid, &bundle.gop, &bundle.gop)?;
        gop_exact_one &= bench.n.iter().all(|&v| v == 1.0);
    }
    checks.push(Check::at_most(
        "pure-jump account vs closed form (relative)",
        worst_jump,
        1e-10,
    ));
    checks.push(Check::at_most("GOP vs closed form (relative)", worst_gop, 1e-10));
    checks.push(Check::flag(
        "benchmarked GOP identically 1",
        gop_exact_one,
        if gop_exact_one { 1.0 } else { 0.0 },
    ));

    let s_hat: Vec<f64> = terminal.iter().map(|v| v.1).collect();
    let est = Estimate::from_samples(&s_hat);
    checks.push(Check::at_most(
        "BS: E[S0_T/GOP_T] - 1 (supermartingale, 4se slack)",
        est.mean - 1.0,
        4.0 * est.std_error,
    ));

    let mgrid = TimeGrid::uniform(40.0, 0.5)?;
    let paths = simulate_mmm_benchmarked(&MmmParams::default(), &mgrid, opts.seed ^ 0x0a20, opts.paths(10_000))?;
    let mut worst_rise = f64::NEG_INFINITY;
    let marks: Vec<usize> = (0..=8).map(|k| k * (mgrid.len() - 1) / 8).collect();
    for w in marks.windows(2) {
        let diffs: Vec<f64> = paths.iter().map(|p| p.n[w[1]] - p.n[w[0]]).collect();
        let e = Estimate::from_samples(&diffs);
        worst_rise = worst_rise.max(e.mean - 4.0 * e.std_error);
    }
    checks.push(Check::at_most(
        "MMM: max over windows of (mean increment - 4se)",
        worst_rise,
        0.0,
    ));
    let first = Estimate::from_samples(&paths.iter().map(|p| p.n[mgrid.len() - 1] - 1.0).collect::<Vec<_>>());
    checks.push(Check::at_most(
        "MMM: E[N_T] - 1 + 4se (strict decline)",
        first.mean + 4.0 * first.std_error,
        0.0,
    ));
    Ok(checks)
}

fn determinism(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, cfg) in crate::cli::determinism_configs(opts.seed) {
        let a = crate::cli::scratch_dir(&format!("{name}-a"))?;
        let b = crate::cli::scratch_dir(&format!("{name}-b"))?;
        crate::cli::run_config(&cfg, &a)?;
        crate::cli::run_config(&cfg, &b)?;
        let (files, identical) = crate::cli::compare_csv_dirs(&a, &b)?;
        let _ = std::fs::remove_dir_all(&a);
        let _ = std::fs::remove_dir_all(&b);
        checks.push(Check::flag(
            format!("{name}: {files} CSV files byte-identical"),
            identical && files > 0,
            files as f64,
        ));
    }
    Ok(checks)
}
