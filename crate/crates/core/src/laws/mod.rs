//! Laws of honest times: the hitting-time integral, closed forms for
//! geometric Brownian motion and squared Bessel processes, the general
//! transient-diffusion formula, inversion to CDFs and Monte Carlo estimators.

pub mod bessel;
pub mod diffusion;
pub mod gbm;
pub mod mc;

pub use bessel::*;
pub use diffusion::*;
pub use gbm::*;
pub use mc::*;

use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate, invert_laplace_with, InversionTarget, LaplaceTransform, TalbotOptions};

/// `E e^{−λg} = ∫_1^∞ E e^{−λτ_a} da/a`.
pub fn law_via_hitting(hitting_transform: impl Fn(f64, f64) -> Result<f64>, lambda: f64) -> Result<f64> {
    let failure = std::cell::RefCell::new(None);
    let integrand = |a: f64| match hitting_transform(a, lambda) {
        Ok(v) => v / a,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let r = integrate(integrand, 1.0, f64::INFINITY, 1e-13);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let v = r?.value;
    if !(-1e-12..=1.0 + 1e-9).contains(&v) {
        return Err(Error::Invariant(format!(
            "hitting-time integral gave {v}, outside [0, 1]"
        )));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Models with an analytic honest-time law.
#[derive(Debug, Clone)]
pub enum LawModel {
    Gbm(GbmParams),
    Bessel(BesselParams),
    Diffusion(ScaleDiffusion),
}

impl LawModel {
    pub fn laplace(&self, lambda: f64) -> Result<f64> {
        match self {
            LawModel::Gbm(p) => gbm_laplace(p, lambda),
            LawModel::Bessel(p) => bessel_laplace(p, lambda),
            LawModel::Diffusion(d) => diffusion_laplace(d, lambda),
        }
    }

    pub fn laplace_transform(&self) -> LaplaceTransform {
        match self {
            LawModel::Gbm(p) => gbm_transform(*p),
            LawModel::Bessel(p) => bessel_transform(*p),
            LawModel::Diffusion(d) => diffusion_transform(d.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            LawModel::Gbm(p) => format!("gbm(sigma={})", p.sigma),
            LawModel::Bessel(p) => format!("bessel(delta={}, x={})", p.delta, p.x),
            LawModel::Diffusion(d) => format!("{}(x0={})", d.label, d.x0),
        }
    }
}

/// `P(g ≤ t)`, with a method tag and an error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfValue {
    pub value: f64,
    pub method: &'static str,
    pub error_estimate: f64,
}

pub fn honest_time_cdf_detailed(model: &LawModel, t: f64) -> Result<CdfValue> {
    if !(t >= 0.0) {
        return Err(invalid(format!("t must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(CdfValue {
            value: 0.0,
            method: "trivial",
            error_estimate: 0.0,
        });
    }
    if let LawModel::Bessel(p) = model {
        if p.delta == 3.0 {
            return Ok(CdfValue {
                value: bessel3_cdf(p.x, t)?,
                method: "closed-form",
                error_estimate: 0.0,
            });
        }
    }
    let opts = TalbotOptions {
        target: InversionTarget::Cdf,
        ..TalbotOptions::default()
    };
    let inv = invert_laplace_with(&model.laplace_transform(), t, opts)?;
    Ok(CdfValue {
        value: inv.value.clamp(0.0, 1.0),
        method: "talbot",
        error_estimate: inv.error_estimate,
    })
}

pub fn honest_time_cdf(model: &LawModel, t: f64) -> Result<f64> {
    honest_time_cdf_detailed(model, t).map(|c| c.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    #[test]
    fn doob_mass() {
        let v = law_via_hitting(|a, _| Ok(1.0 / a), 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gbm_chain() {
        let p = GbmParams::new(0.2).unwrap();
        for lambda in [1e-4, 0.01, 0.02, 0.06, 0.16, 1.0, 10.0] {
            let chain = law_via_hitting(|a, l| gbm_hitting_laplace(&p, a, l), lambda).unwrap();
            assert!((chain - gbm_laplace(&p, lambda).unwrap()).abs() < 1e-8, "λ={lambda}");
        }
    }

    #[test]
    fn bessel_chain() {
        for delta in [2.5, 3.0, 4.0, 5.0] {
            let p = BesselParams::new(delta, 1.0).unwrap();
            for lambda in [0.1, 1.0, 2.0] {
                let chain = law_via_hitting(|a, l| bessel_hitting_laplace(&p, a, l), lambda).unwrap();
                assert!(
                    (chain - bessel_laplace(&p, lambda).unwrap()).abs() < 1e-6,
                    "δ={delta} λ={lambda}"
                );
            }
        }
    }

    #[test]
    fn bessel3_density_transform() {
        let p = BesselParams::new(3.0, 1.0).unwrap();
        for lambda in [0.1, 0.5, 1.0, 2.0] {
            let q = integrate(
                |t| (-lambda * t).exp() * bessel3_density(1.0, t).unwrap(),
                0.0,
                f64::INFINITY,
                1e-10,
            )
            .unwrap();
            assert!((q.value - bessel_laplace(&p, lambda).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn inversion_matches_closed_cdf() {
        let p = BesselParams::new(3.0, 1.0).unwrap();
        let tr = bessel_transform(p);
        let opts = TalbotOptions {
            target: InversionTarget::Cdf,
            ..TalbotOptions::default()
        };
        for t in [0.3, 1.0, 4.0] {
            let inv = invert_laplace_with(&tr, t, opts).unwrap();
            assert!((inv.value - bessel3_cdf(1.0, t).unwrap()).abs() < 1e-5, "t={t}");
        }
    }

    #[test]
    fn cdf_monotone_and_bounded() {
        let models = [
            LawModel::Gbm(GbmParams::new(0.2).unwrap()),
            LawModel::Bessel(BesselParams::new(4.0, 1.0).unwrap()),
        ];
        for m in &models {
            let mut prev = 0.0;
            for t in [0.01, 0.1, 0.5, 2.0, 10.0, 50.0] {
                let c = honest_time_cdf(m, t).unwrap();
                assert!((0.0..=1.0).contains(&c) && c >= prev - 1e-9, "{} t={t}: {c}", m.label());
                prev = c;
            }
        }
        assert_eq!(honest_time_cdf(&models[0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn transforms_are_completely_monotone_on_grids() {
        let models = [
            LawModel::Gbm(GbmParams::new(0.3).unwrap()),
            LawModel::Bessel(BesselParams::new(3.0, 1.0).unwrap()),
            LawModel::Bessel(BesselParams::new(5.0, 2.0).unwrap()),
            LawModel::Diffusion(ScaleDiffusion::squared_bessel(4.0, 1.0).unwrap()),
        ];
        for m in &models {
            assert!((m.laplace(1e-8).unwrap() - 1.0).abs() < 1e-4);
            let grid: Vec<f64> = (0..12).map(|k| 0.05 * 1.6f64.powi(k)).collect();
            let vals: Vec<f64> = grid.iter().map(|&l| m.laplace(l).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[1] < w[0]);
            }
            for (g, v) in grid.windows(3).zip(vals.windows(3)) {
                let s1 = (v[1] - v[0]) / (g[1] - g[0]);
                let s2 = (v[2] - v[1]) / (g[2] - g[1]);
                assert!(s2 > s1);
            }
        }
    }

    #[test]
    fn dependence_on_starting_level() {
        let a = bessel3_density(1.0, 1.0).unwrap();
        let b = bessel3_density(2.0, 1.0).unwrap();
        assert!((a - b).abs() > 1e-3);
        let g = GbmParams::new(0.2).unwrap();
        assert_eq!(LawModel::Gbm(g).laplace(0.3).unwrap(), gbm_laplace(&g, 0.3).unwrap());
    }
}
