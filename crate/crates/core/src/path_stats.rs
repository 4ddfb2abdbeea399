//! Statistics of benchmarked paths: running extrema, the Azéma process
//! `Z = N/Σ`, honest-time estimates and discrete checks of the Doob–Meyer
//! and time-change identities.

use crate::error::{invalid, Error, Result};

/// Default tail threshold: a path counts as finished once `Z_T ≤ ε`.
pub const DEFAULT_EPSILON: f64 = 0.01;

fn check_positive(n: &[f64]) -> Result<()> {
    if n.is_empty() {
        return Err(invalid("empty path"));
    }
    if let Some(x) = n.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(invalid(format!("path values must be positive and finite, found {x}")));
    }
    Ok(())
}

/// Running maximum and running minimum.
pub fn running_extrema(n: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_positive(n)?;
    let mut sigma = Vec::with_capacity(n.len());
    let mut low = Vec::with_capacity(n.len());
    let (mut hi, mut lo) = (n[0], n[0]);
    for &x in n {
        hi = hi.max(x);
        lo = lo.min(x);
        sigma.push(hi);
        low.push(lo);
    }
    Ok((sigma, low))
}

pub fn azema_process(n: &[f64], sigma: &[f64]) -> Result<Vec<f64>> {
    if n.len() != sigma.len() {
        return Err(invalid("path and running maximum differ in length"));
    }
    Ok(n.iter()
        .zip(sigma)
        .map(|(&x, &s)| if x == s { 1.0 } else { x / s })
        .collect())
}

/// Last index attaining the maximum.
pub fn last_argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if v < values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HonestTime {
    pub time: f64,
    pub index: usize,
    /// Upper bound `Z_T` on the probability that the true maximum comes later.
    pub tail_bound: f64,
}

/// `g = sup{t : N_t = Σ_t}` on the grid, accepted only when `Z_T ≤ ε`.
pub fn extract_honest_time(times: &[f64], n: &[f64], sigma: &[f64], epsilon: f64) -> Result<HonestTime> {
    if times.len() != n.len() || n.len() != sigma.len() {
        return Err(invalid("times, path and running maximum differ in length"));
    }
    check_positive(n)?;
    let last = n.len() - 1;
    let z_t = n[last] / sigma[last];
    if z_t > epsilon {
        return Err(Error::HorizonTooShort { z_t, epsilon });
    }
    let target = sigma[last];
    let index = (0..n.len()).rev().find(|&i| n[i] >= target).unwrap_or(0);
    Ok(HonestTime {
        time: times[index],
        index,
        tail_bound: z_t,
    })
}

/// `Z_t = 1 + M_t − ln Σ_t` with `M_t = ∫(1/Σ) dN` as a left-point sum.
#[derive(Debug, Clone)]
pub struct DoobMeyerDecomposition {
    pub martingale_part: Vec<f64>,
    pub increasing_part: Vec<f64>,
    pub reconstruction: Vec<f64>,
}

impl DoobMeyerDecomposition {
    pub fn sup_error(&self, z: &[f64]) -> f64 {
        self.reconstruction
            .iter()
            .zip(z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Path must start at `N_0 = Σ_0`; values are measured relative to `N_0`.
pub fn doob_meyer_check(n: &[f64], sigma: &[f64]) -> Result<DoobMeyerDecomposition> {
    check_positive(n)?;
    if n.len() != sigma.len() {
        return Err(invalid("path and running maximum differ in length"));
    }
    let x0 = n[0];
    let mut m = 0.0;
    let mut martingale_part = Vec::with_capacity(n.len());
    let mut increasing_part = Vec::with_capacity(n.len());
    let mut reconstruction = Vec::with_capacity(n.len());
    for i in 0..n.len() {
        if i > 0 {
            m += (n[i] - n[i - 1]) / sigma[i - 1];
        }
        let a = (sigma[i] / x0).ln();
        martingale_part.push(m);
        increasing_part.push(a);
        reconstruction.push(1.0 + m - a);
    }
    Ok(DoobMeyerDecomposition {
        martingale_part,
        increasing_part,
        reconstruction,
    })
}

/// `E(ln Σ∞ | F_t) = N_t/Σ_t + ln Σ_t`.
pub fn conditional_logmax(n_t: f64, sigma_t: f64) -> Result<f64> {
    if !(n_t > 0.0) || !(n_t <= sigma_t) {
        return Err(invalid(format!("need 0 < N_t ≤ Σ_t, got N_t = {n_t}, Σ_t = {sigma_t}")));
    }
    Ok(n_t / sigma_t + sigma_t.ln())
}

#[derive(Debug, Clone)]
pub struct TimeChangeCheck {
    /// Itô sums `D_t = Σ ΔN/N_−`.
    pub d_path: Vec<f64>,
    /// Realized quadratic variation `Σ (ΔN/N_−)²`.
    pub qv_path: Vec<f64>,
    /// `sup_t |N_0 exp(D_t − ½⟨D⟩_t) − N_t|`.
    pub reconstruction_error: f64,
    /// The log-corrected sequence `W_{⟨D⟩} − ½⟨D⟩`, equal to `ln(N_t/N_0)`.
    pub log_corrected: Vec<f64>,
    /// Last argmax of `log_corrected`.
    pub honest_index: usize,
}

pub fn time_change_check(n: &[f64]) -> Result<TimeChangeCheck> {
    check_positive(n)?;
    let x0 = n[0];
    let (mut d, mut qv) = (0.0, 0.0);
    let mut d_path = Vec::with_capacity(n.len());
    let mut qv_path = Vec::with_capacity(n.len());
    let mut err: f64 = 0.0;
    for i in 0..n.len() {
        if i > 0 {
            let r = (n[i] - n[i - 1]) / n[i - 1];
            d += r;
            qv += r * r;
        }
        d_path.push(d);
        qv_path.push(qv);
        err = err.max((x0 * (d - 0.5 * qv).exp() - n[i]).abs());
    }
    let log_corrected: Vec<f64> = n.iter().map(|&x| (x / x0).ln()).collect();
    let honest_index = last_argmax(&log_corrected).unwrap_or(0);
    Ok(TimeChangeCheck {
        d_path,
        qv_path,
        reconstruction_error: err,
        log_corrected,
        honest_index,
    })
}

/// Both sides of `E k(g) = E ∫ k(t) d ln Σ_t` on one path, for `N_0 = 1` and
/// a deterministic `k`; the integral uses right-point evaluation, where `Σ`
/// increases.
pub fn dual_projection_sides(times: &[f64], sigma: &[f64], g_time: f64, k: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut integral = 0.0;
    for i in 1..sigma.len() {
        let inc = (sigma[i] / sigma[i - 1]).ln();
        if inc > 0.0 {
            integral += k(times[i]) * inc;
        }
    }
    (k(g_time), integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrema_and_azema() {
        let n = [1.0, 2.0, 1.5];
        let (s, i) = running_extrema(&n).unwrap();
        assert_eq!(s, vec![1.0, 2.0, 2.0]);
        assert_eq!(i, vec![1.0, 1.0, 1.0]);
        let z = azema_process(&n, &s).unwrap();
        assert_eq!(z, vec![1.0, 1.0, 0.75]);
        let (s, _) = running_extrema(&[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(s, vec![3.0; 3]);
        assert!(running_extrema(&[]).is_err());
        assert_eq!(azema_process(&[0.4], &[1.6]).unwrap()[0], 0.25);
    }

    #[test]
    fn honest_time_takes_the_last_maximum() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let n = [1.0, 2.0, 1.5, 2.0, 0.01];
        let (s, _) = running_extrema(&n).unwrap();
        let g = extract_honest_time(&t, &n, &s, 0.01).unwrap();
        assert_eq!(g.index, 3);
        assert!(matches!(
            extract_honest_time(&t, &n, &s, 0.001),
            Err(Error::HorizonTooShort { .. })
        ));
        let dec = [1.0, 0.1, 0.001];
        let (s, _) = running_extrema(&dec).unwrap();
        assert_eq!(extract_honest_time(&[0.0, 1.0, 2.0], &dec, &s, 0.01).unwrap().time, 0.0);
    }

    #[test]
    fn constant_path_decomposition() {
        let n = [1.0; 5];
        let (s, _) = running_extrema(&n).unwrap();
        let dm = doob_meyer_check(&n, &s).unwrap();
        assert!(dm.martingale_part.iter().all(|&m| m == 0.0));
        assert!(dm.increasing_part.iter().all(|&a| a == 0.0));
        assert!(dm.reconstruction.iter().all(|&r| r == 1.0));
        let tc = time_change_check(&n).unwrap();
        assert!(tc.d_path.iter().chain(&tc.qv_path).all(|&x| x == 0.0));
    }

    #[test]
    fn log_max_values() {
        assert_eq!(conditional_logmax(1.0, 1.0).unwrap(), 1.0);
        assert!((conditional_logmax(0.5, 2.0).unwrap() - 0.943_147_180_559_945_3).abs() < 1e-15);
        assert!(conditional_logmax(2.0, 1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn path() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-0.3..0.3f64, 1..200).prop_map(|steps| {
                let mut x = 1.0f64;
                std::iter::once(1.0)
                    .chain(steps.into_iter().map(move |s| {
                        x *= s.exp();
                        x
                    }))
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn azema_in_unit_interval_and_one_at_maxima(n in path()) {
                let (s, lo) = running_extrema(&n).unwrap();
                let z = azema_process(&n, &s).unwrap();
                for i in 0..n.len() {
                    prop_assert!(z[i] > 0.0 && z[i] <= 1.0);
                    prop_assert!(s[i] >= n[i] && lo[i] <= n[i]);
                    if n[i] == s[i] { prop_assert_eq!(z[i], 1.0); }
                    if i > 0 { prop_assert!(s[i] >= s[i - 1] && lo[i] <= lo[i - 1]); }
                }
            }

            #[test]
            fn log_max_grows_only_at_maxima(n in path()) {
                let (s, _) = running_extrema(&n).unwrap();
                let z = azema_process(&n, &s).unwrap();
                let dm = doob_meyer_check(&n, &s).unwrap();
                for i in 1..n.len() {
                    let inc = dm.increasing_part[i] - dm.increasing_part[i - 1];
                    prop_assert!(inc >= 0.0);
                    if inc > 0.0 { prop_assert_eq!(z[i], 1.0); }
                }
            }

            #[test]
            fn argmax_invariant_under_scaling(n in path(), c in 0.01..100.0f64) {
                let scaled: Vec<f64> = n.iter().map(|x| c * x).collect();
                let a = last_argmax(&n).unwrap();
                let b = last_argmax(&scaled).unwrap();
                prop_assert_eq!(n[a], n[b]);
            }

            #[test]
            fn time_change_argmax_matches_path_argmax(n in path()) {
                let tc = time_change_check(&n).unwrap();
                prop_assert_eq!(tc.honest_index, last_argmax(&n).unwrap());
                for w in tc.qv_path.windows(2) { prop_assert!(w[1] >= w[0]); }
            }
        }
    }
}
