//! Honest time of a transient squared Bessel process, the last time it sits
//! at its running minimum (equivalently the last maximum of `(x/R²)^ν`).

use libm::erfc;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::numerics::bessel::recip;
use crate::numerics::{bessel_k_scaled, bessel_k_scaled_complex, integrate_complex, LaplaceTransform, NumericsError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselParams {
    pub delta: f64,
    pub nu: f64,
    pub x: f64,
}

impl BesselParams {
    pub fn new(delta: f64, x: f64) -> Result<Self> {
        if !(delta > 2.0 && delta.is_finite()) {
            return Err(invalid(format!("squared Bessel dimension must exceed 2, got {delta}")));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(format!("starting point must be positive, got {x}")));
        }
        Ok(BesselParams {
            delta,
            nu: 0.5 * delta - 1.0,
            x,
        })
    }
}

/// `E e^{−λτ_a}` for the first time `(x/R²)^ν` reaches `a ≥ 1`, i.e. `R²`
/// falls to `x a^{−1/ν}`: `K_ν(w) / (√a K_ν(w a^{−1/(2ν)}))` with `w = √(2λx)`.
pub fn bessel_hitting_laplace(p: &BesselParams, a: f64, lambda: f64) -> Result<f64> {
    if !(a >= 1.0) {
        return Err(invalid(format!("hitting level must be ≥ N_0 = 1, got {a}")));
    }
    if !(lambda > 0.0) {
        return Err(invalid(format!("λ must be positive, got {lambda}")));
    }
    if a == 1.0 {
        return Ok(1.0);
    }
    let w = (2.0 * lambda * p.x).sqrt();
    let v = w * a.powf(-0.5 / p.nu);
    let ratio = bessel_k_scaled(p.nu, w)? / bessel_k_scaled(p.nu, v)?;
    Ok(ratio * (-(w - v)).exp() / a.sqrt())
}

/// `E e^{−λg} = 2ν ∫_0^1 s^{ν−1} K_ν(w)/K_ν(ws) ds`, `w = √(2λx)`, evaluated
/// after the change of variable `s = v^{1/(2ν)}` that removes the endpoint
/// singularity: `∫_0^1 v^{−1/2} K_ν(w)/K_ν(w s(v)) dv`.
pub fn bessel_laplace_complex(p: &BesselParams, lambda: Complex64) -> Result<Complex64> {
    if lambda.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let w = (2.0 * lambda * p.x).sqrt();
    if w.re < 0.0 {
        return Err(invalid("λ outside the cut plane"));
    }
    let kw = bessel_k_scaled_complex(p.nu, w)?;
    let failure = std::cell::Cell::new(None::<NumericsError>);
    let integrand = |v: f64| -> Complex64 {
        let s = v.powf(0.5 / p.nu);
        let ws = w * s;
        if ws.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match bessel_k_scaled_complex(p.nu, ws) {
            Ok(kws) if kws.re.is_finite() && kws.im.is_finite() => kw * recip(kws) * (-(w - ws)).exp() / v.sqrt(),
            // K_ν(ws) leaves the f64 range only near s = 0, where the ratio vanishes
            Ok(_) | Err(NumericsError::OutOfRange { .. }) if ws.norm() < 1.0 => Complex64::new(0.0, 0.0),
            Ok(_) => {
                failure.set(Some(NumericsError::OutOfRange {
                    what: "bessel_laplace integrand",
                    regime: "moderate argument",
                }));
                Complex64::new(f64::NAN, 0.0)
            }
            Err(e) => {
                failure.set(Some(e));
                Complex64::new(f64::NAN, 0.0)
            }
        }
    };
    let result = integrate_complex(integrand, 0.0, 1.0, 1e-13);
    if let Some(e) = failure.take() {
        return Err(Error::Numerics(e));
    }
    Ok(result?.0)
}

pub fn bessel_laplace(p: &BesselParams, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("λ must be positive, got {lambda}")));
    }
    Ok(bessel_laplace_complex(p, Complex64::new(lambda, 0.0))?.re)
}

pub fn bessel_transform(p: BesselParams) -> LaplaceTransform {
    LaplaceTransform::new(
        move |s| bessel_laplace_complex(&p, s).map_err(|e| NumericsError::Inversion(e.to_string())),
        format!("squared Bessel honest time, delta = {}, x = {}", p.delta, p.x),
    )
}

/// Density of the honest time for `δ = 3`: `(2πxt)^{−1/2}(1 − e^{−x/(2t)})`.
pub fn bessel3_density(x: f64, t: f64) -> Result<f64> {
    if !(x > 0.0) || !(t > 0.0) {
        return Err(invalid(format!("need x > 0 and t > 0, got x = {x}, t = {t}")));
    }
    Ok(-(-x / (2.0 * t)).exp_m1() / (2.0 * PI * x * t).sqrt())
}

/// `P(g ≤ t)` for `δ = 3`: `√(2t/(πx))(1 − e^{−x/(2t)}) + erfc(√(x/(2t)))`.
pub fn bessel3_cdf(x: f64, t: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid(format!("need x > 0, got {x}")));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * t / (PI * x)).sqrt() * -(-x / (2.0 * t)).exp_m1() + erfc((x / (2.0 * t)).sqrt()))
}

/// `P(g > t | F_t) = (I_t/R²_t)^ν`.
pub fn bessel_conditional_z(p: &BesselParams, r2_t: f64, i_t: f64) -> Result<f64> {
    if !(i_t > 0.0) || !(i_t <= r2_t) {
        return Err(invalid(format!("need 0 < I_t ≤ R²_t, got I_t = {i_t}, R²_t = {r2_t}")));
    }
    Ok((i_t / r2_t).powf(p.nu))
}
