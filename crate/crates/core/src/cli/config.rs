//! Experiment configuration, read from TOML. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::ScaleDiffusion;
use crate::maxima::MaxPayoffSpec;
use crate::sde::{MarketConfig, MmmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Figures,
    MaxlawCheck,
    HedgeBacktest,
    Law,
    Invert,
    Validate,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Figures => "figures",
            ExperimentKind::MaxlawCheck => "maxlaw-check",
            ExperimentKind::HedgeBacktest => "hedge-backtest",
            ExperimentKind::Law => "law",
            ExperimentKind::Invert => "invert",
            ExperimentKind::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Gbm {
        sigma: f64,
    },
    Bessel {
        delta: f64,
        x: f64,
    },
    Mmm {
        #[serde(default = "default_alpha0")]
        alpha0: f64,
        #[serde(default = "default_eta")]
        eta: f64,
        #[serde(default = "one")]
        x: f64,
    },
    Market(MarketSpec),
    Diffusion {
        family: DiffusionFamily,
        delta: f64,
        x0: f64,
    },
}

fn default_alpha0() -> f64 {
    MmmParams::default().alpha0
}

fn default_eta() -> f64 {
    MmmParams::default().eta
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionFamily {
    SquaredBessel,
}

/// Constant-coefficient market: `m` Wiener and `d − m` jump drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub m: usize,
    pub d: usize,
    pub r: f64,
    pub a: Vec<f64>,
    /// Row `j − 1` holds the volatilities of account `j`.
    pub b: Vec<Vec<f64>>,
    #[serde(default)]
    pub h: Vec<f64>,
    pub x0: Vec<f64>,
    /// Account benchmarked by the GOP to form `N`; 0 is the savings account.
    #[serde(default)]
    pub account: usize,
}

impl MarketSpec {
    pub fn build(&self) -> Result<MarketConfig> {
        if self.b.len() != self.d || self.b.iter().any(|row| row.len() != self.d) {
            return Err(Error::Config(format!("model.b must be a {0}x{0} matrix", self.d)));
        }
        if self.account > self.d {
            return Err(Error::Config(format!("model.account must be at most {}", self.d)));
        }
        let flat: Vec<f64> = self.b.iter().flatten().copied().collect();
        let b = DMatrix::from_row_slice(self.d, self.d, &flat);
        MarketConfig::constant(
            self.m,
            self.d,
            self.r,
            self.a.clone(),
            b,
            self.h.clone(),
            self.x0.clone(),
        )
        .map_err(|e| Error::Config(format!("model: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    /// Tail threshold for `Z_t` where experiments run paths to the tail.
    #[serde(default)]
    pub adaptive_epsilon: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            horizon: 50.0,
            dt: 0.01,
            adaptive_epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Worker threads; `HTLAB_THREADS` takes precedence. Results do not depend on it.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 50,
            seed: 1,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffConfig {
    pub name: String,
    #[serde(default)]
    pub strike: Option<f64>,
    #[serde(default)]
    pub exponent: Option<f64>,
}

impl PayoffConfig {
    pub fn build(&self) -> Result<MaxPayoffSpec> {
        MaxPayoffSpec::from_name(&self.name, self.strike, self.exponent).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("payoff.name: {m}")),
            other => Error::Config(format!("payoff: {other}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeConfig {
    pub strike: f64,
    /// Rebalance at every `k`-th grid point.
    #[serde(default = "one_usize")]
    pub rebalance_every: usize,
    /// Paths written in full to the ledger file.
    #[serde(default = "default_ledger_paths")]
    pub ledger_paths: usize,
}

fn one_usize() -> usize {
    1
}

fn default_ledger_paths() -> usize {
    5
}

impl Default for HedgeConfig {
    fn default() -> Self {
        HedgeConfig {
            strike: 2.5,
            rebalance_every: 1,
            ledger_paths: default_ledger_paths(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "all_criteria")]
    pub criteria: Vec<u8>,
    #[serde(default = "one")]
    pub path_scale: f64,
    #[serde(default = "one")]
    pub dt_scale: f64,
}

fn all_criteria() -> Vec<u8> {
    (1..=11).collect()
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            criteria: all_criteria(),
            path_scale: 1.0,
            dt_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub payoff: Option<PayoffConfig>,
    #[serde(default)]
    pub law: Option<LawConfig>,
    #[serde(default)]
    pub hedge: Option<HedgeConfig>,
    #[serde(default)]
    pub validate: Option<ValidateConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn check(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if !(self.grid.dt > 0.0 && self.grid.dt.is_finite()) {
            return bad("grid.dt", format!("must be positive, got {}", self.grid.dt));
        }
        if !(self.grid.horizon > 0.0 && self.grid.horizon.is_finite()) {
            return bad("grid.T", format!("must be positive, got {}", self.grid.horizon));
        }
        if let Some(e) = self.grid.adaptive_epsilon {
            if !(e > 0.0 && e < 1.0) {
                return bad("grid.adaptive_epsilon", format!("must lie in (0, 1), got {e}"));
            }
        }
        if self.mc.n_paths == 0 {
            return bad("mc.n_paths", "must be at least 1".into());
        }
        if self.mc.threads == Some(0) {
            return bad("mc.threads", "must be at least 1".into());
        }
        match &self.model {
            ModelConfig::Gbm { sigma } if !(*sigma > 0.0) => {
                bad("model.sigma", format!("must be positive, got {sigma}"))
            }
            ModelConfig::Bessel { delta, x } if !(*delta > 2.0 && *x > 0.0) => bad(
                "model.delta",
                format!("need delta > 2 and x > 0, got delta = {delta}, x = {x}"),
            ),
            ModelConfig::Mmm { alpha0, eta, x } if !(*alpha0 > 0.0 && *eta > 0.0 && *x > 0.0) => {
                bad("model.alpha0", "alpha0, eta and x must be positive".into())
            }
            ModelConfig::Market(spec) => spec.build().map(|_| ()),
            ModelConfig::Diffusion { .. } => self.diffusion().map(|_| ()),
            _ => Ok(()),
        }?;
        if let Some(p) = &self.payoff {
            p.build()?;
        }
        if let Some(h) = &self.hedge {
            if !(h.strike > 0.0) || h.rebalance_every == 0 {
                return bad(
                    "hedge.strike",
                    "strike must be positive and rebalance_every at least 1".into(),
                );
            }
        }
        if let Some(l) = &self.law {
            if l.lambdas.iter().any(|&v| !(v >= 0.0)) {
                return bad("law.lambdas", "values must be nonnegative".into());
            }
            if l.times.iter().any(|&v| !(v >= 0.0)) {
                return bad("law.times", "values must be nonnegative".into());
            }
        }
        if let Some(v) = &self.validate {
            if v.criteria.iter().any(|c| !(1..=11).contains(c)) {
                return bad("validate.criteria", "criteria are numbered 1 to 11".into());
            }
            if !(v.path_scale > 0.0 && v.dt_scale > 0.0) {
                return bad("validate.path_scale", "scales must be positive".into());
            }
        }
        Ok(())
    }

    pub fn mmm_params(&self) -> Option<MmmParams> {
        match self.model {
            ModelConfig::Mmm { alpha0, eta, x } => Some(MmmParams { alpha0, eta, x }),
            _ => None,
        }
    }

    pub fn diffusion(&self) -> Result<ScaleDiffusion> {
        match &self.model {
            ModelConfig::Diffusion {
                family: DiffusionFamily::SquaredBessel,
                delta,
                x0,
            } => ScaleDiffusion::squared_bessel(*delta, *x0).map_err(|e| Error::Config(format!("model: {e}"))),
            _ => Err(Error::Config("model.kind: not a diffusion".into())),
        }
    }

    pub fn model_label(&self) -> String {
        match &self.model {
            ModelConfig::Gbm { sigma } => format!("gbm(sigma={sigma})"),
            ModelConfig::Bessel { delta, x } => format!("bessel(delta={delta},x={x})"),
            ModelConfig::Mmm { alpha0, eta, x } => format!("mmm(alpha0={alpha0},eta={eta},x={x})"),
            ModelConfig::Market(s) => format!("market(m={},d={},account={})", s.m, s.d, s.account),
            ModelConfig::Diffusion { delta, x0, .. } => format!("diffusion(squared-bessel,delta={delta},x0={x0})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml("[model]\nkind = \"mmm\"\n").unwrap();
        assert_eq!(cfg.mmm_params(), Some(MmmParams::default()));
        assert_eq!(cfg.mc, McConfig::default());
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = ExperimentConfig::from_toml("[model]\nkind = \"gbm\"\nsigma = 0.2\nsgima = 0.3\n").unwrap_err();
        assert!(err.to_string().contains("sgima"), "{err}");
        let err =
            ExperimentConfig::from_toml("[model]\nkind = \"gbm\"\nsigma = 0.2\n[grid]\nT = 1\ndt = 0.1\nstep = 2\n")
                .unwrap_err();
        assert!(err.to_string().contains("step"), "{err}");
    }

    #[test]
    fn rejects_unknown_model_and_payoff() {
        let err = ExperimentConfig::from_toml("[model]\nkind = \"heston\"\n").unwrap_err();
        assert!(err.to_string().contains("heston"), "{err}");
        let err = ExperimentConfig::from_toml("[model]\nkind = \"gbm\"\nsigma = 0.2\n[payoff]\nname = \"straddle\"\n")
            .unwrap_err();
        assert!(err.to_string().contains("payoff"), "{err}");
    }

    #[test]
    fn validates_values() {
        assert!(ExperimentConfig::from_toml("[model]\nkind = \"bessel\"\ndelta = 1.5\nx = 1\n").is_err());
        assert!(
            ExperimentConfig::from_toml("[model]\nkind = \"gbm\"\nsigma = 0.2\n[mc]\nn_paths = 0\nseed = 1\n").is_err()
        );
    }

    #[test]
    fn round_trips() {
        let text = "experiment = \"law\"\n[model]\nkind = \"gbm\"\nsigma = 0.2\n[law]\nlambdas = [0.02, 0.06]\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
