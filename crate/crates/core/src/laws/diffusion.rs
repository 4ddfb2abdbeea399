//! Honest-time law of a transient diffusion through its scale function and
//! the decreasing eigenfunction `φ_λ` of `Gφ = λφ`.
//!
//! `φ_λ` is carried as `q = y φ'/φ` on a uniform grid in `ℓ = ln y`, where
//! `Gφ = λφ` with `G = ½σ²∂² + b∂` becomes the Riccati equation
//! `q' = A − q² + Bq`, `A = 2λy²/σ²`, `B = 1 − 2by/σ²`. Integrating from a
//! large `y_max` downwards is stable for the decreasing branch.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::numerics::{LaplaceTransform, NumericsError};

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const STEP: f64 = 1e-3;
/// `|A(y_max)|` above which the asymptotic boundary value is trusted.
const ASYMPTOTIC_A: f64 = 400.0;
const STABILITY_TOL: f64 = 1e-9;
const MAX_DOUBLINGS: usize = 40;
/// Stop the lower integral once `φ(x)/φ(u)` falls below `e^{-TAIL_LOG}`.
const TAIL_LOG: f64 = 45.0;
const MAX_NODES: usize = 4_000_000;

#[derive(Clone)]
pub struct ScaleDiffusion {
    pub drift: Coefficient,
    pub diffusion: Coefficient,
    pub scale: Coefficient,
    pub scale_prime: Coefficient,
    pub x0: f64,
    pub label: String,
}

impl std::fmt::Debug for ScaleDiffusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScaleDiffusion")
            .field("label", &self.label)
            .field("x0", &self.x0)
            .finish()
    }
}

impl ScaleDiffusion {
    pub fn new(
        drift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64) -> f64 + Send + Sync + 'static,
        scale: impl Fn(f64) -> f64 + Send + Sync + 'static,
        scale_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        x0: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let d = ScaleDiffusion {
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            scale: Arc::new(scale),
            scale_prime: Arc::new(scale_prime),
            x0,
            label: label.into(),
        };
        d.validate()?;
        Ok(d)
    }

    /// `dY = δ dt + 2√Y dW` with `s(y) = −y^{−ν}`.
    pub fn squared_bessel(delta: f64, x0: f64) -> Result<Self> {
        if !(delta > 2.0) {
            return Err(invalid(format!("squared Bessel dimension must exceed 2, got {delta}")));
        }
        let nu = 0.5 * delta - 1.0;
        Self::new(
            move |_| delta,
            |y| 2.0 * y.sqrt(),
            move |y| -y.powf(-nu),
            move |y| nu * y.powf(-nu - 1.0),
            x0,
            format!("BESQ({delta})"),
        )
    }

    /// Checks `s < 0`, `s' > 0`, `s(∞) = 0` and `Gs = 0` on a log-spaced probe set.
    pub fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(invalid(format!("starting point must be positive, got {}", self.x0)));
        }
        let mut prev = f64::NEG_INFINITY;
        for k in -24..=24 {
            let y = self.x0 * 2f64.powf(k as f64 / 2.0);
            let (s, sp, sig) = ((self.scale)(y), (self.scale_prime)(y), (self.diffusion)(y));
            if !(s < 0.0) || !(sp > 0.0) || !(s > prev) {
                return Err(invalid(format!(
                    "{}: scale function must be negative and increasing, s({y}) = {s}, s'({y}) = {sp}",
                    self.label
                )));
            }
            if !(sig > 0.0 && sig.is_finite()) {
                return Err(invalid(format!(
                    "{}: diffusion coefficient must be positive, got {sig} at {y}",
                    self.label
                )));
            }
            prev = s;
            let eps = 1e-4;
            let spp = ((self.scale_prime)(y * (1.0 + eps)) - (self.scale_prime)(y * (1.0 - eps))) / (2.0 * eps * y);
            let b = (self.drift)(y);
            let gen = 0.5 * sig * sig * spp + b * sp;
            let size = (0.5 * sig * sig * spp).abs() + (b * sp).abs();
            if gen.abs() > 1e-6 * size {
                return Err(invalid(format!(
                    "{}: generator does not annihilate the scale function at {y}: Gs = {gen:e}",
                    self.label
                )));
            }
        }
        let far = (self.scale)(self.x0 * 1e30);
        if !(far.abs() < 1e-2 * (self.scale)(self.x0).abs()) {
            return Err(invalid(format!(
                "{}: scale function does not vanish at infinity",
                self.label
            )));
        }
        Ok(())
    }

    fn a_b(&self, y: f64) -> (f64, f64) {
        let sig2 = (self.diffusion)(y).powi(2);
        (2.0 * y * y / sig2, 1.0 - 2.0 * (self.drift)(y) * y / sig2)
    }
}

/// `φ_λ` on a grid in `ℓ = ln y`, stored as `ln φ` and `q = d ln φ/dℓ`,
/// normalized so that `φ(y_max) = 1`.
#[derive(Debug, Clone)]
pub struct PhiSolution {
    pub lambda: Complex64,
    pub ell0: f64,
    pub h: f64,
    pub log_phi: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub y_max: f64,
    pub normalization_note: String,
}

impl PhiSolution {
    pub fn y_min(&self) -> f64 {
        self.ell0.exp()
    }

    fn node(&self, y: f64) -> Option<(usize, f64)> {
        let pos = (y.ln() - self.ell0) / self.h;
        let last = self.q.len() - 1;
        if !(pos >= -1e-9 && pos <= last as f64 + 1e-9) {
            return None;
        }
        let i = (pos.floor().max(0.0) as usize).min(last.saturating_sub(1));
        Some((i, pos - i as f64))
    }

    /// `ln φ(y)` by cubic Hermite interpolation with the stored slopes.
    pub fn log_value(&self, y: f64) -> Option<Complex64> {
        let (i, u) = self.node(y)?;
        if self.q.len() == 1 {
            return Some(self.log_phi[0]);
        }
        let (p0, p1) = (self.log_phi[i], self.log_phi[i + 1]);
        let (m0, m1) = (self.q[i] * self.h, self.q[i + 1] * self.h);
        let (u2, u3) = (u * u, u * u * u);
        Some(p0 * (2.0 * u3 - 3.0 * u2 + 1.0) + m0 * (u3 - 2.0 * u2 + u) + p1 * (-2.0 * u3 + 3.0 * u2) + m1 * (u3 - u2))
    }

    pub fn value(&self, y: f64) -> Option<f64> {
        self.log_value(y).map(|l| l.exp().re)
    }

    /// `max |Gφ − λφ| / max |φ|` over the probes, from five-point differences on the grid.
    pub fn residual(&self, diff: &ScaleDiffusion, probes: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &y in probes {
            let (i, u) = self
                .node(y)
                .ok_or_else(|| invalid(format!("probe {y} outside the solved range")))?;
            let i = if u > 0.5 { i + 1 } else { i };
            if i < 2 || i + 2 >= self.q.len() {
                return Err(invalid(format!("probe {y} too close to the grid edge")));
            }
            let yi = (self.ell0 + i as f64 * self.h).exp();
            let base = self.log_phi[i];
            let f = |k: usize| (self.log_phi[k] - base).exp();
            let (fm2, fm1, f0, fp1, fp2) = (f(i - 2), f(i - 1), f(i), f(i + 1), f(i + 2));
            let h = self.h;
            let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
            let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
            let sig = (diff.diffusion)(yi);
            let dy1 = d1 / yi;
            let dy2 = (d2 - d1) / (yi * yi);
            let res = 0.5 * sig * sig * dy2 + (diff.drift)(yi) * dy1 - self.lambda * f0;
            let mag = base.exp().norm();
            worst = worst.max(res.norm() * mag);
            scale = scale.max(mag);
        }
        Ok(worst / scale)
    }
}

fn rhs(diff: &ScaleDiffusion, lambda: Complex64, ell: f64, q: Complex64) -> (Complex64, f64) {
    let (a, b) = diff.a_b(ell.exp());
    let a = lambda * a;
    (a - q * q + b * q, a.norm())
}

/// Asymptotic boundary value: `q ≈ −√A + B/2 − ½ d ln√A/dℓ`.
fn boundary_q(diff: &ScaleDiffusion, lambda: Complex64, ell: f64) -> Complex64 {
    let d = 1e-4;
    let (a, b) = diff.a_b(ell.exp());
    let (a_up, _) = diff.a_b((ell + d).exp());
    let (a_dn, _) = diff.a_b((ell - d).exp());
    let dlog = 0.25 * (a_up.ln() - a_dn.ln()) / (2.0 * d);
    -(lambda * a).sqrt() + 0.5 * b - 0.5 * dlog
}

/// Integrates from `ell_top` down to `ell_bottom` on nodes `ell_bottom + k h`.
/// `stop` is consulted below `ell_stop_from` and may end the run early.
fn integrate_down(
    diff: &ScaleDiffusion,
    lambda: Complex64,
    ell_anchor: f64,
    k_top: usize,
    mut k_bottom: isize,
    mut stop: impl FnMut(isize, Complex64, Complex64) -> bool,
) -> Result<(isize, Vec<Complex64>, Vec<Complex64>)> {
    let h = STEP;
    let ell_of = |k: isize| ell_anchor + k as f64 * h;
    let mut q = boundary_q(diff, lambda, ell_of(k_top as isize));
    let mut l = Complex64::new(0.0, 0.0);
    let mut qs = vec![q];
    let mut ls = vec![l];
    let mut k = k_top as isize;
    while k > k_bottom {
        let ell = ell_of(k);
        let (_, a_mag) = rhs(diff, lambda, ell, q);
        let sub = ((20.0 * h * (a_mag.sqrt() + q.norm())).ceil() as usize).max(1);
        let hs = -h / sub as f64;
        let mut e = ell;
        for _ in 0..sub {
            let (k1, _) = rhs(diff, lambda, e, q);
            let (k2, _) = rhs(diff, lambda, e + 0.5 * hs, q + 0.5 * hs * k1);
            let (k3, _) = rhs(diff, lambda, e + 0.5 * hs, q + 0.5 * hs * k2);
            let (k4, _) = rhs(diff, lambda, e + hs, q + hs * k3);
            l += hs / 6.0 * (q + 2.0 * (q + 0.5 * hs * k1) + 2.0 * (q + 0.5 * hs * k2) + (q + hs * k3));
            q += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            e += hs;
        }
        k -= 1;
        if !(q.re.is_finite() && q.im.is_finite()) {
            return Err(Error::Numerics(NumericsError::NoConvergence(
                "phi_lambda Riccati integration",
            )));
        }
        qs.push(q);
        ls.push(l);
        if qs.len() > MAX_NODES {
            return Err(invalid("phi_lambda grid exceeds the node budget"));
        }
        if stop(k, q, l) {
            k_bottom = k;
        }
    }
    qs.reverse();
    ls.reverse();
    Ok((k, qs, ls))
}

fn initial_top(diff: &ScaleDiffusion, lambda: Complex64, y_floor: f64) -> f64 {
    let mut y = 4.0 * y_floor;
    for _ in 0..64 {
        if (lambda * diff.a_b(y).0).norm() >= ASYMPTOTIC_A {
            break;
        }
        y *= 2.0;
    }
    y
}

fn check_decreasing(sol: &PhiSolution) -> bool {
    sol.lambda.im != 0.0 || sol.q.iter().all(|q| q.re <= 0.0)
}

fn solve_once(diff: &ScaleDiffusion, lambda: Complex64, y_max: f64, y_low: f64) -> Result<PhiSolution> {
    let ell_x = diff.x0.ln();
    let k_top = ((y_max.ln() - ell_x) / STEP).ceil().max(4.0) as usize;
    let k_bottom = ((y_low.ln() - ell_x) / STEP).floor().min(-4.0) as isize;
    let (k_min, q, log_phi) = integrate_down(diff, lambda, ell_x, k_top, k_bottom, |_, _, _| false)?;
    Ok(PhiSolution {
        lambda,
        ell0: ell_x + k_min as f64 * STEP,
        h: STEP,
        log_phi,
        q,
        y_max: (ell_x + k_top as f64 * STEP).exp(),
        normalization_note: "phi(y_max) = 1; only ratios are meaningful".into(),
    })
}

/// Solves for the decreasing eigenfunction on a range covering `y_grid` and
/// the starting point, doubling `y_max` until `φ(x0)/φ(min y_grid)` is stable.
pub fn solve_phi_lambda(diff: &ScaleDiffusion, lambda: f64, y_grid: &[f64]) -> Result<PhiSolution> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("λ must be positive, got {lambda}")));
    }
    let lo = y_grid.iter().copied().fold(diff.x0, f64::min) * 0.5;
    let hi = y_grid.iter().copied().fold(diff.x0, f64::max);
    if !(lo > 0.0) {
        return Err(invalid("y_grid must be positive"));
    }
    let lam = Complex64::new(lambda, 0.0);
    let mut y_max = initial_top(diff, lam, hi);
    let mut prev: Option<f64> = None;
    for _ in 0..MAX_DOUBLINGS {
        let sol = solve_once(diff, lam, y_max, lo)?;
        let ratio = (sol.log_value(diff.x0).unwrap() - sol.log_value(lo).unwrap()).re;
        if check_decreasing(&sol) {
            if let Some(p) = prev {
                if (ratio - p).abs() <= STABILITY_TOL {
                    return Ok(sol);
                }
            }
            prev = Some(ratio);
        } else {
            prev = None;
        }
        y_max *= 2.0;
    }
    Err(Error::Numerics(NumericsError::NoConvergence(
        "phi_lambda boundary stabilization",
    )))
}

/// `E e^{−λg}` for g the last time `Y` sits at its running minimum, as
/// `∫_{−∞}^{ln x} w(ℓ) φ(x)/φ(e^ℓ) dℓ` with `w = −u s'(u)/s(u)`.
fn laplace_once(diff: &ScaleDiffusion, lambda: Complex64, y_max: f64) -> Result<(Complex64, bool)> {
    let ell_x = diff.x0.ln();
    let h = STEP;
    let k_top = ((y_max.ln() - ell_x) / h).ceil().max(4.0) as usize;
    let mut l_x = None;
    let weight = |ell: f64| {
        let u = ell.exp();
        -u * (diff.scale_prime)(u) / (diff.scale)(u)
    };
    let mut terms: Vec<Complex64> = Vec::new();
    let (_, q, _) = integrate_down(
        diff,
        lambda,
        ell_x,
        k_top,
        -(MAX_NODES as isize) + k_top as isize,
        |k, _, l| {
            if k == 0 {
                l_x = Some(l);
            }
            if k <= 0 {
                let e = l_x.unwrap() - l;
                terms.push(weight(ell_x + k as f64 * h) * e.exp());
                return k <= -8 && k % 2 == 0 && e.re < -TAIL_LOG;
            }
            false
        },
    )?;
    let decreasing = lambda.im != 0.0 || q.iter().all(|v| v.re <= 0.0);
    let n = terms.len();
    if n < 9 || n.is_multiple_of(2) {
        return Err(invalid("lower integration range too short"));
    }
    let mut simpson = terms[0] + terms[n - 1];
    for (i, t) in terms.iter().enumerate().take(n - 1).skip(1) {
        simpson += if i % 2 == 1 { 4.0 * *t } else { 2.0 * *t };
    }
    simpson *= h / 3.0;
    let q_min = q[0];
    let tail = terms[n - 1] / (-q_min);
    Ok((simpson + tail, decreasing))
}

pub fn diffusion_laplace_complex(diff: &ScaleDiffusion, lambda: Complex64) -> Result<Complex64> {
    if lambda.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut y_max = initial_top(diff, lambda, diff.x0);
    let mut prev: Option<Complex64> = None;
    for _ in 0..MAX_DOUBLINGS {
        let (v, decreasing) = laplace_once(diff, lambda, y_max)?;
        if decreasing {
            if let Some(p) = prev {
                if (v - p).norm() <= STABILITY_TOL * v.norm().max(1e-3) {
                    return Ok(v);
                }
            }
            prev = Some(v);
        } else {
            prev = None;
        }
        y_max *= 2.0;
    }
    Err(Error::Numerics(NumericsError::NoConvergence(
        "diffusion Laplace transform boundary stabilization",
    )))
}

pub fn diffusion_laplace(diff: &ScaleDiffusion, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("λ must be positive, got {lambda}")));
    }
    let v = diffusion_laplace_complex(diff, Complex64::new(lambda, 0.0))?.re;
    if !(v > 0.0 && v <= 1.0 + 1e-9) {
        return Err(Error::Invariant(format!(
            "{}: Laplace transform {v} outside (0, 1]",
            diff.label
        )));
    }
    Ok(v)
}

pub fn diffusion_transform(diff: ScaleDiffusion) -> LaplaceTransform {
    let note = format!("honest time of {} from x0 = {}", diff.label, diff.x0);
    LaplaceTransform::new(
        move |s| diffusion_laplace_complex(&diff, s).map_err(|e| NumericsError::Inversion(e.to_string())),
        note,
    )
}
