//! Modified Bessel function of the second kind, `K_ν`, for real order and
//! real or complex argument.
//!
//! The order is split as `ν = μ + n` with `|μ| ≤ 1/2`. `K_μ` and `K_{μ+1}` come
//! from Temme's series when `|z| ≤ 2` and from Steed's evaluation of the
//! Thompson–Barnett continued fraction otherwise; `K_ν` then follows by
//! forward recurrence, which is stable for `K`.
//!
//! Everything is computed in the exponentially scaled form `e^z K_ν(z)` so the
//! complex contour evaluations used by Laplace inversion cannot overflow.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::NumericsError;

const MAX_ITER: usize = 20_000;
const EPS: f64 = 1e-16;
const SERIES_RADIUS: f64 = 2.0;

/// Taylor coefficients of `1/Γ(z) = Σ c_k z^k`, k = 1..26.
const INV_GAMMA: [f64; 26] = [
    1.000_000_000_000_000_0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// `1/z` without the underflow of `|z|²` for tiny `z`.
pub(crate) fn recip(z: Complex64) -> Complex64 {
    let m = z.re.abs().max(z.im.abs());
    let w = z / m;
    w.conj() / (w.norm_sqr() * m)
}

/// `1/Γ(1+x)` for `|x| ≤ 1/2`.
fn inv_gamma_1p(x: f64) -> f64 {
    INV_GAMMA.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Temme's auxiliary quantities `(γ₁, γ₂, 1/Γ(1+μ), 1/Γ(1−μ))`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // γ₁ = −Σ c_{2j} μ^{2j−2}, γ₂ = Σ c_{2j−1} μ^{2j−2}; no cancellation at μ→0
    let mu2 = mu * mu;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for j in (0..13).rev() {
        g1 = g1 * mu2 - INV_GAMMA[2 * j + 1];
        g2 = g2 * mu2 + INV_GAMMA[2 * j];
    }
    (g1, g2, inv_gamma_1p(mu), inv_gamma_1p(-mu))
}

/// `(e^z K_μ(z), e^z K_{μ+1}(z))` for `|μ| ≤ 1/2`, `|z| ≤ 2`.
fn temme_series(mu: f64, z: Complex64) -> Result<(Complex64, Complex64), NumericsError> {
    let half = z * 0.5;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -half.ln();
    let e = d * mu;
    let fact2 = if e.norm() < EPS {
        Complex64::new(1.0, 0.0)
    } else {
        e.sinh() / e
    };
    let (g1, g2, gampl, gammi) = temme_gammas(mu);
    let mut ff = (e.cosh() * g1 + fact2 * d * g2) * fact;
    let mut sum = ff;
    let ee = e.exp();
    let mut p = ee * (0.5 / gampl);
    let mut q = 0.5 / (ee * gammi);
    let mut c = Complex64::new(1.0, 0.0);
    let dd = half * half;
    let mut sum1 = p;
    let mu2 = mu * mu;
    let mut converged = false;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (ff * fi + p + q) / (fi * fi - mu2);
        c = c * dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - ff * fi);
        sum1 += del1;
        if del.norm() < sum.norm() * EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence("Temme series for K_nu"));
    }
    let scale = z.exp();
    Ok((sum * scale, sum1 * 2.0 * recip(z) * scale))
}

/// `(e^z K_μ(z), e^z K_{μ+1}(z))` for `|μ| ≤ 1/2`, `|z| > 2`, `Re z ≥ 0`.
fn steed_fraction(mu: f64, z: Complex64) -> Result<(Complex64, Complex64), NumericsError> {
    let one = Complex64::new(1.0, 0.0);
    let mut b = (one + z) * 2.0;
    let mut d = one / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25 - mu * mu;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut converged = false;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += qnew * c;
        b += 2.0;
        d = one / (b + d * a);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).norm() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence("continued fraction for K_nu"));
    }
    h *= a1;
    let kmu = (PI / (2.0 * z)).sqrt() / s;
    let k1 = kmu * (z + mu + 0.5 - h) / z;
    Ok((kmu, k1))
}

/// `(e^z K_ν(z), e^z K_{ν+1}(z))` for real `ν ≥ 0` and `Re z > 0` (or on the
/// imaginary axis away from 0).
pub fn bessel_k_scaled_pair(nu: f64, z: Complex64) -> Result<(Complex64, Complex64), NumericsError> {
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(NumericsError::Domain {
            what: "bessel_k order",
            value: nu,
            expected: "finite nu >= 0",
        });
    }
    if !(z.re >= 0.0 && z.norm() > 0.0 && z.re.is_finite() && z.im.is_finite()) {
        return Err(NumericsError::Domain {
            what: "bessel_k argument",
            value: z.re,
            expected: "Re z >= 0, z != 0",
        });
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k0, mut k1) = if z.norm() <= SERIES_RADIUS {
        temme_series(mu, z)?
    } else {
        steed_fraction(mu, z)?
    };
    let two_over_z = 2.0 * recip(z);
    for i in 1..=(nl as usize) {
        let next = two_over_z * (mu + i as f64) * k1 + k0;
        k0 = k1;
        k1 = next;
    }
    Ok((k0, k1))
}

/// `e^z K_ν(z)` for complex `z` in the closed right half-plane.
pub fn bessel_k_scaled_complex(nu: f64, z: Complex64) -> Result<Complex64, NumericsError> {
    bessel_k_scaled_pair(nu, z).map(|(k, _)| k)
}

/// `e^z K_ν(z)` for real `z > 0`.
pub fn bessel_k_scaled(nu: f64, z: f64) -> Result<f64, NumericsError> {
    if !(z > 0.0) {
        return Err(NumericsError::Domain {
            what: "bessel_k",
            value: z,
            expected: "z > 0",
        });
    }
    let k = bessel_k_scaled_complex(nu, Complex64::new(z, 0.0))?.re;
    if !k.is_finite() {
        return Err(NumericsError::OutOfRange {
            what: "bessel_k",
            regime: "small-argument series",
        });
    }
    Ok(k)
}

/// `K_ν(z)` for real `ν ≥ 0`, `z > 0`.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64, NumericsError> {
    let scaled = bessel_k_scaled(nu, z)?;
    let k = scaled * (-z).exp();
    if k == 0.0 {
        return Err(NumericsError::OutOfRange {
            what: "bessel_k",
            regime: "large-argument continued fraction",
        });
    }
    Ok(k)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_order_closed_form() {
        // K_{1/2}(z) = sqrt(pi/(2z)) e^{-z}
        assert!(rel(bessel_k(0.5, 1.0).unwrap(), 0.461_068_504_447_894_6) < 1e-13);
        assert!(rel(bessel_k(0.5, 2.0).unwrap(), 0.119_937_771_968_061_45) < 1e-13);
        let mut z = 1e-4;
        while z <= 50.0 {
            let ratio = bessel_k(0.5, z).unwrap() * (2.0 * z / PI).sqrt() * z.exp();
            assert!((ratio - 1.0).abs() < 1e-10, "z = {z}: {ratio}");
            z *= 1.37;
        }
    }

    #[test]
    fn reference_values() {
        // mpmath.besselk at 30 digits
        let cases = [
            (0.0, 1e-6, 13.931_442_073_626_419),
            (0.0, 0.5, 0.924_419_071_227_665_9),
            (0.25, 1.3, 0.283_449_150_982_160_74),
            (1.0, 1.0, 0.601_907_230_197_234_6),
            (1.0, 2.0, 0.139_865_881_816_522_43),
            (1.0, 2.000_000_1, 0.139_865_863_433_842_43),
            (1.5, 3.0, 0.048_034_646_842_352_79),
            (2.0, 7.5, 3.199_235_870_561_916e-4),
            (3.7, 0.01, 680_739_416.857_525_8),
            (5.0, 50.0, 4.367_182_254_100_986e-23),
            (4.9, 1e-3, 1.546_331_152_186_497_8e17),
            (1.0, 1e-6, 999_999.999_992_784_3),
            (2.5, 20.0, 6.686_152_875_723_867e-10),
            (0.75, 2.5, 0.068_617_528_097_489_46),
        ];
        for (nu, z, want) in cases {
            let got = bessel_k(nu, z).unwrap();
            assert!(rel(got, want) < 1e-10, "K_{nu}({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn complex_reference_values() {
        let cases = [
            (
                0.25,
                Complex64::new(1.0, 1.0),
                Complex64::new(0.077_457_305_537_894_72, -0.363_270_292_953_734_84),
            ),
            (
                1.0,
                Complex64::new(0.3, -1.5),
                Complex64::new(-0.597_317_328_172_997_5, 0.567_393_738_466_095_8),
            ),
            (
                1.0,
                Complex64::new(1e-3, 20.0),
                Complex64::new(-0.104_869_889_859_113_57, -0.259_728_050_055_622_4),
            ),
            (
                0.5,
                Complex64::new(5.0, -5.0),
                Complex64::new(0.001_997_649_224_528_047_3, -0.002_468_749_935_191_715_4),
            ),
            (
                2.0,
                Complex64::new(0.1, 0.05),
                Complex64::new(95.503_444_470_447_38, -127.996_607_457_958_57),
            ),
        ];
        for (nu, z, want) in cases {
            let got = bessel_k_scaled_complex(nu, z).unwrap() * (-z).exp();
            assert!(
                (got - want).norm() / want.norm() < 1e-10,
                "K_{nu}({z}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn small_argument_behaves_like_inverse() {
        for z in [1e-3, 1e-5, 1e-7] {
            let k = bessel_k(1.0, z).unwrap();
            assert!((k * z - 1.0).abs() < 10.0 * z, "z K_1(z) = {}", k * z);
        }
    }

    #[test]
    fn strictly_decreasing_in_argument() {
        for nu in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.3, 5.0] {
            let mut prev = f64::INFINITY;
            let mut z = 1e-6;
            while z < 50.0 {
                let k = bessel_k(nu, z).unwrap();
                assert!(k < prev, "K_{nu} not decreasing at {z}");
                prev = k;
                z *= 1.1;
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(bessel_k(1.0, 0.0), Err(NumericsError::Domain { .. })));
        assert!(matches!(bessel_k(1.0, -2.0), Err(NumericsError::Domain { .. })));
        assert!(matches!(bessel_k(1.0, 800.0), Err(NumericsError::OutOfRange { .. })));
        assert!(bessel_k_scaled(1.0, 800.0).unwrap() > 0.0);
    }

    #[test]
    fn inverse_gamma_series_matches_known_values() {
        // 1/Γ(1/2) = 1/sqrt(pi), 1/Γ(3/2) = 2/sqrt(pi)
        assert!((inv_gamma_1p(-0.5) - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((inv_gamma_1p(0.5) - 2.0 / PI.sqrt()).abs() < 1e-15);
        let (g1, g2, _, _) = temme_gammas(0.0);
        assert!((g1 + 0.577_215_664_901_532_9).abs() < 1e-15);
        assert!((g2 - 1.0).abs() < 1e-15);
    }
}
