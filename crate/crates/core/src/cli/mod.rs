//! Batch experiment runner behind the `htlab` binary.
//!
//! Each experiment writes CSV artifacts plus `manifest.json` into the output
//! directory. Output depends only on the configuration and seed.

mod config;
mod csv;

pub use config::{
    DiffusionFamily, ExperimentConfig, ExperimentKind, GridConfig, HedgeConfig, LawConfig, MarketSpec, McConfig,
    ModelConfig, PayoffConfig, ValidateConfig,
};

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hedging::{hedge_backtest, protected_portfolio};
use crate::laws::{
    bessel_hitting_laplace, bessel_laplace, cdf_via_logmax, diffusion_laplace, empirical_laplace, gbm_hitting_laplace,
    gbm_laplace, honest_time_cdf_detailed, law_via_hitting, sample_gbm_honest_times, BesselParams, GbmParams, LawModel,
    PathModel,
};
use crate::maxima::{conditional_max_expectation, conditional_max_expectation_sum_form, unconditional_max_expectation};
use crate::numerics::{ks_critical_1pct, ks_statistic, Estimate};
use crate::path_stats::{extract_honest_time, DEFAULT_EPSILON};
use crate::sde::{besq_on_grid, par_paths, simulate_mmm_path, BenchmarkedPath, MmmParams, PathBundle, TimeGrid};
use crate::validation::{run_suite, ValidationOptions};
use csv::{num, CsvFile, FileRecord};

const FAMILY_FIGURES: u64 = 0xf161;
const FAMILY_FIG7: u64 = 0xf167;
const FAMILY_MAXLAW: u64 = 0xa001;
const FAMILY_HEDGE: u64 = 0xa002;
const FAMILY_LAW: u64 = 0xa003;
const FAMILY_INVERT: u64 = 0xa004;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub model: String,
    pub seed: u64,
    pub n_paths: usize,
    pub grid_t: f64,
    pub grid_dt: f64,
    pub adaptive_epsilon: Option<f64>,
    pub version: String,
    pub config: String,
    pub files: Vec<FileRecord>,
}

/// Result of one run; `validation_passed` is set by `validate` only.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<FileRecord>,
    pub lines: Vec<String>,
    pub validation_passed: Option<bool>,
}

impl RunOutcome {
    /// 0 on success, 2 when a validation check failed.
    pub fn exit_code(&self) -> i32 {
        match self.validation_passed {
            Some(false) => 2,
            _ => 0,
        }
    }
}

/// Exit status for an error: 1 for configuration problems and any other failure.
pub fn error_exit_code(_e: &Error) -> i32 {
    1
}

/// Worker count from `HTLAB_THREADS`, then `mc.threads`.
pub fn worker_threads(cfg: &ExperimentConfig) -> Result<Option<usize>> {
    match std::env::var("HTLAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "HTLAB_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(cfg.mc.threads),
    }
}

/// Runs the configured experiment into `cfg.output_dir` (default `htlab-out`).
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let out = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("htlab-out"));
    run_config(cfg, &out)
}

pub fn run_config(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    cfg.check()?;
    let kind = cfg
        .experiment
        .ok_or_else(|| Error::Config("experiment: not given on the command line or in the config".into()))?;
    std::fs::create_dir_all(out)?;
    let body = || -> Result<RunOutcome> {
        let mut outcome = match kind {
            ExperimentKind::Figures => figures(cfg, out)?,
            ExperimentKind::MaxlawCheck => maxlaw_check(cfg, out)?,
            ExperimentKind::HedgeBacktest => hedge(cfg, out)?,
            ExperimentKind::Law => law(cfg, out)?,
            ExperimentKind::Invert => invert(cfg, out)?,
            ExperimentKind::Validate => validate(cfg, out)?,
        };
        let manifest = Manifest {
            experiment: kind.name().into(),
            model: cfg.model_label(),
            seed: cfg.mc.seed,
            n_paths: cfg.mc.n_paths,
            grid_t: cfg.grid.horizon,
            grid_dt: cfg.grid.dt,
            adaptive_epsilon: cfg.grid.adaptive_epsilon,
            version: env!("CARGO_PKG_VERSION").into(),
            config: cfg.to_toml(),
            files: outcome.files.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Invariant(e.to_string()))?;
        std::fs::write(out.join("manifest.json"), json + "\n")?;
        outcome
            .lines
            .push(format!("wrote {} files to {}", outcome.files.len() + 1, out.display()));
        Ok(outcome)
    };
    match worker_threads(cfg)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

fn grid_of(cfg: &ExperimentConfig) -> Result<TimeGrid> {
    TimeGrid::uniform(cfg.grid.horizon, cfg.grid.dt).map_err(|e| Error::Config(format!("grid: {e}")))
}

fn gbm_on_grid(sigma: f64, grid: &TimeGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut log_n = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    out.push(1.0);
    for i in 0..grid.steps() {
        let dt = grid.dt(i);
        let z: f64 = rng.sample(StandardNormal);
        log_n += 2.0 * sigma * dt.sqrt() * z - 2.0 * sigma * sigma * dt;
        out.push(f64::exp(log_n));
    }
    out
}

/// Benchmarked paths `N` of the configured model on `grid`.
fn model_paths(cfg: &ExperimentConfig, grid: &TimeGrid, n: usize, family: u64) -> Result<Vec<Vec<f64>>> {
    let seed = cfg.mc.seed;
    let paths: Vec<Result<Vec<f64>>> = match &cfg.model {
        ModelConfig::Gbm { sigma } => par_paths(n, seed, family, |_, rng| Ok(gbm_on_grid(*sigma, grid, rng))),
        ModelConfig::Bessel { delta, x } => {
            let nu = 0.5 * delta - 1.0;
            par_paths(n, seed, family, |_, rng| {
                Ok(besq_on_grid(*delta, *x, grid, rng)?
                    .into_iter()
                    .map(|r2| (x / r2).powf(nu))
                    .collect())
            })
        }
        ModelConfig::Mmm { .. } => {
            let p = cfg.mmm_params().unwrap_or_default();
            par_paths(n, seed, family, |_, rng| Ok(simulate_mmm_path(&p, grid, rng)?.n))
        }
        ModelConfig::Market(spec) => {
            let market = spec.build()?;
            let j = spec.account;
            par_paths(n, seed, family, |_, rng| {
                let b = PathBundle::simulate(&market, grid, rng)?;
                let x0 = b.accounts[j][0] / b.gop[0];
                Ok(b.accounts[j].iter().zip(&b.gop).map(|(x, g)| x / g / x0).collect())
            })
        }
        ModelConfig::Diffusion { .. } => {
            return Err(Error::Config(
                "model.kind: diffusion models have no path simulator; use the law or invert experiments".into(),
            ))
        }
    };
    paths.into_iter().collect()
}

fn epsilon(cfg: &ExperimentConfig) -> f64 {
    cfg.grid.adaptive_epsilon.unwrap_or(DEFAULT_EPSILON)
}

fn figures(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let grid = grid_of(cfg)?;
    let n = cfg.mc.n_paths;
    let raw = model_paths(cfg, &grid, n, FAMILY_FIGURES)?;
    let paths: Vec<BenchmarkedPath> = raw
        .into_iter()
        .map(|p| BenchmarkedPath::from_values(grid.clone(), p))
        .collect::<Result<_>>()?;
    let t = grid.times();
    let mut files = Vec::new();

    let mut f1 = CsvFile::create(out, "fig1_paths.csv", &["path_id", "t", "value"])?;
    let mut f2 = CsvFile::create(out, "fig2_running_max.csv", &["path_id", "t", "value"])?;
    let mut f3 = CsvFile::create(out, "fig3_inverse_max.csv", &["path_id", "t", "value"])?;
    for (id, p) in paths.iter().enumerate() {
        for i in 0..t.len() {
            if id < 20 {
                f1.row(&[id.to_string(), num(t[i]), num(p.n[i])])?;
            }
            f2.row(&[id.to_string(), num(t[i]), num(p.sigma[i])])?;
            f3.row(&[id.to_string(), num(t[i]), num(1.0 / p.sigma[i])])?;
        }
    }
    files.extend([f1.finish()?, f2.finish()?, f3.finish()?]);

    let shown = n.min(5);
    let mut f4 = CsvFile::create(out, "fig4_z_process.csv", &["path_id", "t", "value", "sigma", "z"])?;
    for (id, p) in paths.iter().take(shown).enumerate() {
        for i in 0..t.len() {
            f4.row(&[id.to_string(), num(t[i]), num(p.n[i]), num(p.sigma[i]), num(p.z[i])])?;
        }
    }
    files.push(f4.finish()?);

    let strike = cfg.hedge.as_ref().map(|h| h.strike).unwrap_or(2.5);
    let mut f5 = CsvFile::create(out, "fig5_protected.csv", &["path_id", "t", "value", "u"])?;
    for (id, p) in paths.iter().take(shown).enumerate() {
        let prot = protected_portfolio(p, strike)?;
        for i in 0..t.len() {
            f5.row(&[id.to_string(), num(t[i]), num(p.n[i]), num(prot.u[i])])?;
        }
    }
    files.push(f5.finish()?);

    let (delta, x) = match cfg.model {
        ModelConfig::Bessel { delta, x } => (delta, x),
        ModelConfig::Mmm { x, .. } => (4.0, x),
        _ => (4.0, 1.0),
    };
    let nu = 0.5 * delta - 1.0;
    let r2: Vec<Result<Vec<f64>>> = par_paths(shown, cfg.mc.seed, FAMILY_FIG7, |_, rng| {
        besq_on_grid(delta, x, &grid, rng)
    });
    let mut f7 = CsvFile::create(out, "fig7_bessel_z.csv", &["path_id", "t", "value", "r2", "i"])?;
    for (id, path) in r2.into_iter().enumerate() {
        let path = path?;
        let mut i_min = f64::INFINITY;
        for (i, &v) in path.iter().enumerate() {
            i_min = i_min.min(v);
            f7.row(&[id.to_string(), num(t[i]), num((i_min / v).powf(nu)), num(v), num(i_min)])?;
        }
    }
    files.push(f7.finish()?);
    Ok(RunOutcome {
        lines: vec![format!(
            "figures: {n} paths of {} on [0, {}]",
            cfg.model_label(),
            cfg.grid.horizon
        )],
        files,
        validation_passed: None,
    })
}

fn maxlaw_check(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let spec = cfg
        .payoff
        .as_ref()
        .ok_or_else(|| Error::Config("payoff: required for maxlaw-check".into()))?
        .build()?;
    let grid = grid_of(cfg)?;
    let eps = epsilon(cfg);
    let raw = model_paths(cfg, &grid, cfg.mc.n_paths, FAMILY_MAXLAW)?;
    let mut files = Vec::new();
    let mut stats = CsvFile::create(
        out,
        "path_stats.csv",
        &["path_id", "g_hat", "sigma_T", "z_T", "ln_sigma_T"],
    )?;
    let mut inv_max = Vec::with_capacity(raw.len());
    let mut payoffs = Vec::with_capacity(raw.len());
    let mut log_mart = Vec::with_capacity(raw.len());
    for (id, n) in raw.iter().enumerate() {
        let p = BenchmarkedPath::from_values(grid.clone(), n.clone())?;
        let last = n.len() - 1;
        let (s, z) = (p.sigma[last], p.z[last]);
        let g = extract_honest_time(grid.times(), &p.n, &p.sigma, eps)
            .map(|h| num(h.time))
            .unwrap_or_default();
        stats.row(&[id.to_string(), g, num(s), num(z), num(s.ln())])?;
        inv_max.push(1.0 / s);
        payoffs.push(spec.f(s));
        log_mart.push(z + s.ln());
    }
    files.push(stats.finish()?);

    let mut forms = CsvFile::create(
        out,
        "maxlaw.csv",
        &[
            "n_t",
            "sigma_t",
            "closed_form",
            "sum_form",
            "azema_yor_form",
            "abs_diff",
        ],
    )?;
    for &s in &[1.0, 1.5, 2.0, 3.0] {
        for &z in &[1.0, 0.5, 0.1] {
            let n_t = z * s;
            let a = conditional_max_expectation(&spec, n_t, s)?;
            let b = conditional_max_expectation_sum_form(&spec, n_t, s)?;
            let ay = s * spec.tail_integral(s)? - spec.h(s)? * (s - n_t);
            let diff = (a - b).abs().max((a - ay).abs());
            forms.row(&[num(n_t), num(s), num(a), num(b), num(ay), num(diff)])?;
        }
    }
    files.push(forms.finish()?);

    let mut summary = CsvFile::create(out, "summary.csv", &["quantity", "value", "reference", "err_est"])?;
    let ks = ks_statistic(&inv_max, |x| x.clamp(0.0, 1.0))?;
    summary.row(&[
        "ks_inverse_max_vs_uniform".into(),
        num(ks),
        num(ks_critical_1pct(inv_max.len())),
        String::new(),
    ])?;
    let e = Estimate::from_samples(&payoffs);
    let reference = unconditional_max_expectation(&spec, 1.0)
        .map(num)
        .unwrap_or_else(|_| "inf".into());
    summary.row(&[
        format!("mean_{}_of_sigma_T", spec.label),
        num(e.mean),
        reference,
        num(e.std_error),
    ])?;
    let m = Estimate::from_samples(&log_mart);
    summary.row(&[
        "mean_z_T_plus_ln_sigma_T".into(),
        num(m.mean),
        num(1.0),
        num(m.std_error),
    ])?;
    files.push(summary.finish()?);
    Ok(RunOutcome {
        lines: vec![format!(
            "maxlaw-check: KS(1/Sigma_T) = {ks:.4}, E[Z_T + ln Sigma_T] = {:.4} +/- {:.4}",
            m.mean, m.std_error
        )],
        files,
        validation_passed: None,
    })
}

fn hedge(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let h = cfg.hedge.clone().unwrap_or_else(|| HedgeConfig {
        strike: cfg.payoff.as_ref().and_then(|p| p.strike).unwrap_or(2.5),
        ..HedgeConfig::default()
    });
    let grid = grid_of(cfg)?;
    let rebalance = grid
        .coarsen(h.rebalance_every)
        .map_err(|e| Error::Config(format!("hedge.rebalance_every: {e}")))?;
    let raw = model_paths(cfg, &grid, cfg.mc.n_paths, FAMILY_HEDGE)?;
    let mut ledger = CsvFile::create(
        out,
        "hedge_ledger.csv",
        &[
            "path_id",
            "t",
            "n",
            "sigma",
            "z",
            "units",
            "value",
            "wealth",
            "tracking_error",
        ],
    )?;
    let mut summary = CsvFile::create(
        out,
        "hedge_summary.csv",
        &[
            "path_id",
            "terminal_tracking_error",
            "absorbed",
            "absorbed_t",
            "payoff_estimate",
        ],
    )?;
    let mut sq = 0.0;
    for (id, n) in raw.into_iter().enumerate() {
        let path = BenchmarkedPath::from_values(grid.clone(), n)?;
        let l = hedge_backtest(h.strike, &path, &rebalance)?;
        if id < h.ledger_paths {
            for i in 0..l.n.len() {
                ledger.row(&[
                    id.to_string(),
                    num(l.grid.times()[i]),
                    num(l.n[i]),
                    num(l.sigma[i]),
                    num(l.z[i]),
                    num(l.units_in_asset[i]),
                    num(l.benchmarked_value[i]),
                    num(l.wealth[i]),
                    num(l.tracking_error[i]),
                ])?;
            }
        }
        let te = l.terminal_tracking_error();
        sq += te * te;
        let absorbed_t = l.absorbed_at.map(|k| num(l.grid.times()[k])).unwrap_or_default();
        summary.row(&[
            id.to_string(),
            num(te),
            (l.absorbed_at.is_some() as u8).to_string(),
            absorbed_t,
            num(l.terminal_payoff_estimate),
        ])?;
    }
    let rms = (sq / cfg.mc.n_paths as f64).sqrt();
    Ok(RunOutcome {
        lines: vec![format!(
            "hedge-backtest: K = {}, RMS terminal tracking error {rms:.3e}",
            h.strike
        )],
        files: vec![ledger.finish()?, summary.finish()?],
        validation_passed: None,
    })
}

fn law_header() -> [&'static str; 4] {
    ["lambda_or_t", "value", "method", "err_est"]
}

fn law(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let lambdas = cfg.law.as_ref().map(|l| l.lambdas.clone()).unwrap_or_default();
    if lambdas.is_empty() {
        return Err(Error::Config("law.lambdas: required for the law experiment".into()));
    }
    let mut f = CsvFile::create(out, "law_laplace.csv", &law_header())?;
    for &lambda in &lambdas {
        if lambda == 0.0 {
            f.row(&[num(0.0), num(1.0), "trivial".into(), num(0.0)])?;
            continue;
        }
        match &cfg.model {
            ModelConfig::Gbm { sigma } => {
                let p = GbmParams::new(*sigma)?;
                let closed = gbm_laplace(&p, lambda)?;
                let chain = law_via_hitting(|a, l| gbm_hitting_laplace(&p, a, l), lambda)?;
                f.row(&[num(lambda), num(closed), "closed-form".into(), num(0.0)])?;
                f.row(&[
                    num(lambda),
                    num(chain),
                    "hitting-integral".into(),
                    num((chain - closed).abs()),
                ])?;
            }
            ModelConfig::Bessel { delta, x } => {
                let p = BesselParams::new(*delta, *x)?;
                let v = bessel_laplace(&p, lambda)?;
                let chain = law_via_hitting(|a, l| bessel_hitting_laplace(&p, a, l), lambda)?;
                f.row(&[num(lambda), num(v), "bessel-k-quadrature".into(), num(1e-13)])?;
                f.row(&[
                    num(lambda),
                    num(chain),
                    "hitting-integral".into(),
                    num((chain - v).abs()),
                ])?;
            }
            ModelConfig::Diffusion { .. } => {
                let d = cfg.diffusion()?;
                f.row(&[
                    num(lambda),
                    num(diffusion_laplace(&d, lambda)?),
                    "riccati".into(),
                    num(1e-9),
                ])?;
            }
            _ => {
                return Err(Error::Config(
                    "model.kind: Laplace transforms are available for gbm, bessel and diffusion models".into(),
                ))
            }
        }
    }
    if let ModelConfig::Gbm { sigma } = cfg.model {
        let samples = sample_gbm_honest_times(&GbmParams::new(sigma)?, cfg.mc.n_paths, cfg.mc.seed ^ FAMILY_LAW);
        for &lambda in &lambdas {
            let e = empirical_laplace(&samples, lambda);
            f.row(&[num(lambda), num(e.mean), "exact-sampler".into(), num(e.std_error)])?;
        }
    }
    Ok(RunOutcome {
        lines: vec![format!(
            "law: {} transform values for {}",
            lambdas.len(),
            cfg.model_label()
        )],
        files: vec![f.finish()?],
        validation_passed: None,
    })
}

fn law_model(cfg: &ExperimentConfig) -> Result<LawModel> {
    Ok(match &cfg.model {
        ModelConfig::Gbm { sigma } => LawModel::Gbm(GbmParams::new(*sigma)?),
        ModelConfig::Bessel { delta, x } => LawModel::Bessel(BesselParams::new(*delta, *x)?),
        ModelConfig::Mmm { x, .. } => LawModel::Bessel(BesselParams::new(4.0, *x)?),
        ModelConfig::Diffusion { .. } => LawModel::Diffusion(cfg.diffusion()?),
        ModelConfig::Market(_) => {
            return Err(Error::Config(
                "model.kind: honest-time laws need gbm, bessel, mmm or diffusion".into(),
            ))
        }
    })
}

/// Log-max MC undershoots the running maximum by about 0.58 per-step log-sd,
/// so path resolution is capped at a log-sd of 0.01 per step.
const LOGMAX_STEP_VARIANCE: f64 = 1e-4;

fn path_model(cfg: &ExperimentConfig) -> Option<PathModel> {
    let dt = cfg.grid.dt;
    match cfg.model {
        ModelConfig::Gbm { sigma } => Some(PathModel::Gbm {
            sigma,
            dt: dt.min(LOGMAX_STEP_VARIANCE / (4.0 * sigma * sigma)),
        }),
        ModelConfig::Bessel { delta, x } => Some(PathModel::Bessel {
            delta,
            x,
            log_variance: (4.0 * dt / x).min(LOGMAX_STEP_VARIANCE),
        }),
        ModelConfig::Mmm { alpha0, eta, x } => Some(PathModel::Mmm {
            params: MmmParams { alpha0, eta, x },
            log_variance: (4.0 * dt / x).min(LOGMAX_STEP_VARIANCE),
            max_dt: dt,
        }),
        _ => None,
    }
}

fn invert(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let times = cfg.law.as_ref().map(|l| l.times.clone()).unwrap_or_default();
    if times.is_empty() {
        return Err(Error::Config("law.times: required for the invert experiment".into()));
    }
    let model = law_model(cfg)?;
    let mut f = CsvFile::create(out, "law_cdf.csv", &law_header())?;
    for &t in &times {
        // MMM runs the dimension-4 law in φ-time
        let (tau, tag) = match cfg.mmm_params() {
            Some(p) => (p.phi(t), "-phi-time"),
            None => (t, ""),
        };
        let c = honest_time_cdf_detailed(&model, tau)?;
        f.row(&[
            num(t),
            num(c.value),
            format!("{}{tag}", c.method),
            num(c.error_estimate),
        ])?;
    }
    if let Some(pm) = path_model(cfg) {
        for (k, &t) in times.iter().enumerate() {
            let r = cdf_via_logmax(
                &pm,
                t,
                cfg.mc.n_paths,
                cfg.mc.seed ^ FAMILY_INVERT.wrapping_add(k as u64),
            )?;
            let method = if r.clipped { "logmax-mc-clipped" } else { "logmax-mc" };
            f.row(&[num(t), num(r.reported), method.into(), num(r.estimate.std_error)])?;
        }
    }
    Ok(RunOutcome {
        lines: vec![format!(
            "invert: CDF of the honest time at {} points for {}",
            times.len(),
            cfg.model_label()
        )],
        files: vec![f.finish()?],
        validation_passed: None,
    })
}

fn validate(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let v = cfg.validate.clone().unwrap_or_default();
    let opts = ValidationOptions {
        seed: cfg.mc.seed,
        path_scale: v.path_scale,
        dt_scale: v.dt_scale,
    };
    let reports = run_suite(&v.criteria, &opts);
    let mut f = CsvFile::create(
        out,
        "validation.csv",
        &["criterion", "title", "check", "observed", "tolerance", "pass"],
    )?;
    for r in &reports {
        for c in &r.checks {
            f.row(&[
                r.id.to_string(),
                r.title.clone(),
                c.name.clone(),
                num(c.observed),
                c.tolerance.clone(),
                c.pass.to_string(),
            ])?;
        }
    }
    let passed = reports.iter().all(|r| r.pass());
    Ok(RunOutcome {
        lines: reports.iter().map(|r| r.summary_line()).collect(),
        files: vec![f.finish()?],
        validation_passed: Some(passed),
    })
}

/// Small configurations covering every artifact-producing experiment.
pub fn determinism_configs(seed: u64) -> Vec<(String, ExperimentConfig)> {
    let base = |kind: ExperimentKind, model: &str, extra: &str| {
        let text = format!(
            "experiment = \"{}\"\n[model]\n{model}\n[grid]\nT = 5.0\ndt = 0.01\n[mc]\nn_paths = 24\nseed = {seed}\n{extra}",
            kind.name()
        );
        ExperimentConfig::from_toml(&text).expect("built-in configuration parses")
    };
    vec![
        (
            "figures-mmm".into(),
            base(ExperimentKind::Figures, "kind = \"mmm\"", ""),
        ),
        (
            "maxlaw-gbm".into(),
            base(
                ExperimentKind::MaxlawCheck,
                "kind = \"gbm\"\nsigma = 0.2",
                "[payoff]\nname = \"put\"\nstrike = 2.5\n",
            ),
        ),
        (
            "hedge-gbm".into(),
            base(
                ExperimentKind::HedgeBacktest,
                "kind = \"gbm\"\nsigma = 0.2",
                "[hedge]\nstrike = 2.5\nrebalance_every = 2\n",
            ),
        ),
        (
            "law-gbm".into(),
            base(
                ExperimentKind::Law,
                "kind = \"gbm\"\nsigma = 0.2",
                "[law]\nlambdas = [0.02, 0.06, 0.16]\n",
            ),
        ),
        (
            "invert-bessel".into(),
            base(
                ExperimentKind::Invert,
                "kind = \"bessel\"\ndelta = 4.0\nx = 1.0",
                "[law]\ntimes = [0.5, 1.0, 2.0]\n",
            ),
        ),
    ]
}

static SCRATCH: AtomicUsize = AtomicUsize::new(0);

/// A fresh directory under the system temporary directory.
pub fn scratch_dir(tag: &str) -> Result<PathBuf> {
    let k = SCRATCH.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("htlab-{}-{k}-{tag}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir)?;
    }
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Number of CSV files in `a` and whether `b` holds byte-identical copies.
pub fn compare_csv_dirs(a: &Path, b: &Path) -> Result<(usize, bool)> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(a)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    names.sort();
    let mut same = true;
    for p in &names {
        let other = b.join(p.file_name().unwrap_or_default());
        same &= other.exists() && std::fs::read(p)? == std::fs::read(&other)?;
    }
    Ok((names.len(), same))
}
