//! Streaming generators for benchmarked paths in class (C₀).
//!
//! Long-horizon runs (until `Z_t` falls below a tail threshold) would need
//! gigabytes if every path were stored, so models push `(t, N_t)` into a
//! [`PathSink`] that keeps only what it needs and decides when to stop.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;

use super::grid::TimeGrid;
use super::pricing::MmmParams;
use crate::error::{invalid, Result};
use crate::numerics::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

pub trait PathSink {
    fn push(&mut self, t: f64, n: f64) -> Control;
}

impl<F: FnMut(f64, f64) -> Control> PathSink for F {
    fn push(&mut self, t: f64, n: f64) -> Control {
        self(t, n)
    }
}

/// A benchmarked path generator. `run_from` emits `(t0, n0)` first and then
/// one value per step until the sink stops or `t_max` is passed.
pub trait StreamingModel: Send + Sync {
    fn n0(&self) -> f64;
    fn run_from(&self, t0: f64, n0: f64, t_max: f64, rng: &mut ChaCha8Rng, sink: &mut dyn PathSink);

    fn run(&self, t_max: f64, rng: &mut ChaCha8Rng, sink: &mut dyn PathSink) {
        self.run_from(0.0, self.n0(), t_max, rng, sink)
    }
}

/// `N_t = exp(2σW_t − 2σ²t)`, stepped exactly in log space.
#[derive(Debug, Clone, Copy)]
pub struct GbmStream {
    pub sigma: f64,
    pub dt: f64,
    /// See [`gap_variance`].
    pub gap_steps: bool,
}

impl GbmStream {
    pub fn new(sigma: f64, dt: f64) -> Result<Self> {
        if !(sigma > 0.0 && dt > 0.0) {
            return Err(invalid(format!(
                "GBM stream needs sigma > 0 and dt > 0, got {sigma}, {dt}"
            )));
        }
        Ok(GbmStream {
            sigma,
            dt,
            gap_steps: false,
        })
    }

    /// Takes larger exact steps while `N` is well below its running maximum.
    pub fn with_gap_steps(mut self) -> Self {
        self.gap_steps = true;
        self
    }
}

impl StreamingModel for GbmStream {
    fn n0(&self) -> f64 {
        1.0
    }

    fn run_from(&self, t0: f64, n0: f64, t_max: f64, rng: &mut ChaCha8Rng, sink: &mut dyn PathSink) {
        let var = 4.0 * self.sigma * self.sigma;
        let vol = (var * self.dt).sqrt();
        let drift = -0.5 * var * self.dt;
        let mut log_n = n0.ln();
        if sink.push(t0, n0) == Control::Stop {
            return;
        }
        if self.gap_steps {
            let mut t = t0;
            let mut log_max = log_n;
            loop {
                log_max = log_max.max(log_n);
                let dt = gap_variance(var * self.dt, (log_max - log_n).exp()) / var;
                t += dt;
                if t > t_max + 1e-9 * self.dt {
                    return;
                }
                let z: f64 = rng.sample(StandardNormal);
                log_n += -0.5 * var * dt + (var * dt).sqrt() * z;
                if sink.push(t, log_n.exp()) == Control::Stop {
                    return;
                }
            }
        }
        let mut i = 0u64;
        loop {
            i += 1;
            let t = t0 + i as f64 * self.dt;
            if t > t_max + 1e-9 * self.dt {
                return;
            }
            let z: f64 = rng.sample(StandardNormal);
            log_n += drift + vol * z;
            if sink.push(t, log_n.exp()) == Control::Stop {
                return;
            }
        }
    }
}

/// Squared Bessel process `R²` of dimension `δ`, started at `R²_0 = x`, seen
/// through `N = (x/R²)^ν`. Each step has `Δt = v·R²/4`, so the log-variance
/// per step is roughly `v` regardless of the level.
#[derive(Debug, Clone, Copy)]
pub struct BesselStream {
    pub delta: f64,
    pub x: f64,
    pub log_variance: f64,
    pub max_dt: f64,
    /// See [`gap_variance`].
    pub gap_steps: bool,
}

/// Per-step log-variance once `N` sits a factor `ratio` below the maximum seen
/// so far: the step keeps a log-sd of at most a sixth of the gap, so a missed
/// new maximum has probability below `e^{-18}`.
pub fn gap_variance(v: f64, ratio: f64) -> f64 {
    if ratio <= 1.5 {
        return v;
    }
    let gap = ratio.ln() / 6.0;
    v.max(gap * gap)
}

impl BesselStream {
    pub fn new(delta: f64, x: f64, log_variance: f64) -> Result<Self> {
        if !(delta > 2.0 && x > 0.0 && log_variance > 0.0) {
            return Err(invalid(format!(
                "Bessel stream needs delta > 2, x > 0, v > 0, got {delta}, {x}, {log_variance}"
            )));
        }
        Ok(BesselStream {
            delta,
            x,
            log_variance,
            max_dt: f64::INFINITY,
            gap_steps: false,
        })
    }

    /// Takes larger exact steps while `N` is well below its running maximum.
    pub fn with_gap_steps(mut self) -> Self {
        self.gap_steps = true;
        self
    }

    pub fn nu(&self) -> f64 {
        self.delta / 2.0 - 1.0
    }

    fn integer_dimension(&self) -> Option<usize> {
        let k = self.delta.round();
        (k == self.delta && k <= 16.0).then_some(k as usize)
    }

    fn n_of(&self, r2: f64) -> f64 {
        let nu = self.nu();
        if nu == 1.0 {
            self.x / r2
        } else {
            (self.x / r2).powf(nu)
        }
    }
}

/// Exact squared Bessel transitions, with coordinates for integer dimension and
/// a Poisson mixture of gammas otherwise.
struct BesqStepper {
    delta: f64,
    coords: Option<Vec<f64>>,
}

impl BesqStepper {
    fn new(delta: f64, integer: Option<usize>, r2: f64) -> Self {
        let coords = integer.map(|k| {
            let mut c = vec![0.0; k];
            c[0] = r2.sqrt();
            c
        });
        BesqStepper { delta, coords }
    }

    fn step(&mut self, r2: f64, dt: f64, rng: &mut ChaCha8Rng) -> f64 {
        match &mut self.coords {
            Some(c) => {
                let sd = dt.sqrt();
                let mut s = 0.0;
                for ci in c.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *ci += sd * z;
                    s += *ci * *ci;
                }
                s
            }
            None => {
                // R²_{t+Δ}/Δ is noncentral χ² with δ degrees of freedom and noncentrality r2/Δ
                let half_nc = 0.5 * r2 / dt;
                let k = if half_nc > 0.0 {
                    Poisson::new(half_nc).map(|p| p.sample(rng)).unwrap_or(half_nc.round())
                } else {
                    0.0
                };
                let shape = 0.5 * self.delta + k;
                let g = Gamma::new(shape, 1.0).map(|g| g.sample(rng)).unwrap_or(shape);
                2.0 * dt * g
            }
        }
    }
}

/// `R²` of a squared Bessel process of dimension `δ` from `R²_0 = x`, sampled
/// exactly at the points of `grid`.
pub fn besq_on_grid(delta: f64, x: f64, grid: &TimeGrid, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if !(delta > 0.0 && x > 0.0) {
        return Err(invalid(format!(
            "squared Bessel path needs delta > 0 and x > 0, got {delta}, {x}"
        )));
    }
    let k = delta.round();
    let integer = (k == delta && k <= 16.0).then_some(k as usize);
    let mut stepper = BesqStepper::new(delta, integer, x);
    let mut r2 = x;
    let mut out = Vec::with_capacity(grid.len());
    out.push(r2);
    for i in 0..grid.steps() {
        r2 = stepper.step(r2, grid.dt(i), rng).max(f64::MIN_POSITIVE);
        out.push(r2);
    }
    Ok(out)
}

impl StreamingModel for BesselStream {
    fn n0(&self) -> f64 {
        1.0
    }

    fn run_from(&self, t0: f64, n0: f64, t_max: f64, rng: &mut ChaCha8Rng, sink: &mut dyn PathSink) {
        let mut r2 = self.x * n0.powf(-1.0 / self.nu());
        let mut stepper = BesqStepper::new(self.delta, self.integer_dimension(), r2);
        let mut t = t0;
        let mut r2_at_max = r2;
        if sink.push(t, n0) == Control::Stop {
            return;
        }
        loop {
            let v = if self.gap_steps {
                r2_at_max = r2_at_max.min(r2);
                gap_variance(self.log_variance, r2 / r2_at_max)
            } else {
                self.log_variance
            };
            let dt = (0.25 * v * r2).clamp(1e-300, self.max_dt);
            if t + dt > t_max {
                return;
            }
            r2 = stepper.step(r2, dt, rng).max(f64::MIN_POSITIVE);
            t += dt;
            if sink.push(t, self.n_of(r2)) == Control::Stop {
                return;
            }
        }
    }
}

/// Minimal market model in calendar time: `N_t = x/R²_{φ(t)}` with `R²` a
/// four-dimensional squared Bessel process, stepped in `φ`-time with the
/// same log-variance rule as [`BesselStream`].
#[derive(Debug, Clone, Copy)]
pub struct MmmStream {
    pub params: MmmParams,
    pub log_variance: f64,
    pub max_dt: f64,
    /// See [`gap_variance`].
    pub gap_steps: bool,
}

impl MmmStream {
    pub fn new(params: MmmParams, log_variance: f64, max_dt: f64) -> Result<Self> {
        params.validate()?;
        if !(log_variance > 0.0 && max_dt > 0.0) {
            return Err(invalid("MMM stream needs positive step controls"));
        }
        Ok(MmmStream {
            params,
            log_variance,
            max_dt,
            gap_steps: false,
        })
    }

    /// Takes larger exact steps while `N` is well below its running maximum.
    pub fn with_gap_steps(mut self) -> Self {
        self.gap_steps = true;
        self
    }
}

impl StreamingModel for MmmStream {
    fn n0(&self) -> f64 {
        1.0
    }

    fn run_from(&self, t0: f64, n0: f64, t_max: f64, rng: &mut ChaCha8Rng, sink: &mut dyn PathSink) {
        let p = &self.params;
        let mut r2 = p.x / n0;
        let mut stepper = BesqStepper::new(4.0, Some(4), r2);
        let mut t = t0;
        let mut phi = p.phi(t0);
        if sink.push(t, n0) == Control::Stop {
            return;
        }
        // φ is convex, so a cap computed at an earlier time is a lower bound
        let mut cap = p.phi(t + self.max_dt) - phi;
        let mut r2_at_max = r2;
        loop {
            let v = if self.gap_steps {
                r2_at_max = r2_at_max.min(r2);
                gap_variance(self.log_variance, r2 / r2_at_max)
            } else {
                self.log_variance
            };
            let mut dphi = (0.25 * v * r2).max(1e-300);
            if dphi > cap {
                cap = p.phi(t + self.max_dt) - phi;
                dphi = dphi.min(cap);
            }
            phi += dphi;
            let t_next = p.phi_inverse(phi);
            if t_next > t_max {
                return;
            }
            r2 = stepper.step(r2, dphi, rng).max(f64::MIN_POSITIVE);
            t = t_next;
            if sink.push(t, p.x / r2) == Control::Stop {
                return;
            }
        }
    }
}

/// Reproducible parallel map over paths: path `i` uses stream
/// `RngStream::family(seed, family, i)` and results come back in path order.
pub fn par_paths<T: Send>(
    n_paths: usize,
    seed: u64,
    family: u64,
    f: impl Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
) -> Vec<T> {
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::family(seed, family, i as u64).rng();
            f(i, &mut rng)
        })
        .collect()
}

/// Stores every emitted point.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: Option<usize>,
}

impl PathSink for Recorder {
    fn push(&mut self, t: f64, n: f64) -> Control {
        self.times.push(t);
        self.values.push(n);
        match self.limit {
            Some(l) if self.values.len() >= l => Control::Stop,
            _ => Control::Continue,
        }
    }
}

/// State of a path at a requested time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub n: f64,
    pub sigma: f64,
}

/// Running maximum, minimum and last-maximum time of a streamed path, with
/// optional snapshots and a stopping rule `Z_t ≤ ε`.
#[derive(Debug, Clone)]
pub struct RunningStats {
    pub epsilon: Option<f64>,
    pub checkpoints: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub sigma: f64,
    pub i_min: f64,
    pub g: f64,
    pub last_t: f64,
    pub last_n: f64,
    pub steps: usize,
    started: bool,
}

impl RunningStats {
    pub fn new(epsilon: Option<f64>, checkpoints: Vec<f64>) -> Self {
        RunningStats {
            epsilon,
            checkpoints,
            snapshots: Vec::new(),
            sigma: 0.0,
            i_min: f64::INFINITY,
            g: 0.0,
            last_t: 0.0,
            last_n: 0.0,
            steps: 0,
            started: false,
        }
    }

    pub fn z(&self) -> f64 {
        self.last_n / self.sigma
    }

    pub fn reached_tail(&self) -> bool {
        matches!(self.epsilon, Some(e) if self.z() <= e)
    }
}

impl PathSink for RunningStats {
    fn push(&mut self, t: f64, n: f64) -> Control {
        if !self.started || n >= self.sigma {
            self.sigma = n;
            self.g = t;
            self.started = true;
        }
        self.i_min = self.i_min.min(n);
        self.last_t = t;
        self.last_n = n;
        self.steps += 1;
        while self.snapshots.len() < self.checkpoints.len() && t >= self.checkpoints[self.snapshots.len()] - 1e-9 {
            self.snapshots.push(Snapshot {
                t,
                n,
                sigma: self.sigma,
            });
        }
        if self.reached_tail() {
            Control::Stop
        } else {
            Control::Continue
        }
    }
}

/// Watches for `N` exceeding `level`; gives up once `N ≤ floor`.
#[derive(Debug, Clone, Copy)]
pub struct CrossingSink {
    pub level: f64,
    pub floor: f64,
    pub crossed: bool,
    pub final_n: f64,
}

impl CrossingSink {
    pub fn new(level: f64, floor: f64) -> Self {
        CrossingSink {
            level,
            floor,
            crossed: false,
            final_n: f64::NAN,
        }
    }
}

impl PathSink for CrossingSink {
    fn push(&mut self, _t: f64, n: f64) -> Control {
        self.final_n = n;
        if n > self.level {
            self.crossed = true;
            Control::Stop
        } else if n <= self.floor {
            Control::Stop
        } else {
            Control::Continue
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gbm_stream_is_a_martingale_at_fixed_time() {
        let m = GbmStream::new(0.2, 0.01).unwrap();
        let vals = par_paths(20_000, 1, 0, |_, rng| {
            let mut rec = RunningStats::new(None, vec![1.0]);
            m.run(1.0, rng, &mut rec);
            rec.snapshots[0].n
        });
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!((mean - 1.0).abs() < 4.0 * (var / vals.len() as f64).sqrt());
    }

    #[test]
    fn bessel_transitions_have_the_right_mean() {
        // E R²_t = x + δt for both samplers
        for delta in [3.0, 2.5] {
            let x = 1.0;
            let mut st = BesqStepper::new(delta, if delta == 3.0 { Some(3) } else { None }, x);
            let mut rng = RngStream::new(3, 0).rng();
            let n = 40_000;
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..n {
                if let Some(c) = &mut st.coords {
                    c.iter_mut().for_each(|v| *v = 0.0);
                    c[0] = x.sqrt();
                }
                let r = st.step(x, 0.5, &mut rng);
                s += r;
                s2 += r * r;
            }
            let mean = s / n as f64;
            let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
            assert!((mean - (x + delta * 0.5)).abs() < 4.0 * se, "δ = {delta}: {mean}");
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let m = BesselStream::new(4.0, 1.0, 1e-3).unwrap();
        let run = || {
            let mut rec = Recorder {
                limit: Some(500),
                ..Default::default()
            };
            m.run(f64::INFINITY, &mut RngStream::new(9, 2).rng(), &mut rec);
            rec.values
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn running_stats_keep_the_last_maximum() {
        let mut s = RunningStats::new(Some(0.01), vec![]);
        for (t, n) in [(0.0, 1.0), (1.0, 2.0), (2.0, 1.5), (3.0, 2.0), (4.0, 0.5)] {
            s.push(t, n);
        }
        assert_eq!((s.sigma, s.g, s.i_min), (2.0, 3.0, 0.5));
        assert_eq!(s.push(5.0, 0.01), Control::Stop);
    }

    #[test]
    fn mmm_stream_respects_calendar_step_cap() {
        let m = MmmStream::new(MmmParams::default(), 1e-2, 0.05).unwrap();
        let mut rec = Recorder {
            limit: Some(200),
            ..Default::default()
        };
        m.run(1e9, &mut RngStream::new(1, 1).rng(), &mut rec);
        for w in rec.times.windows(2) {
            assert!(w[1] > w[0] && w[1] - w[0] <= 0.05 + 1e-9);
        }
    }

    #[test]
    fn gap_variance_grows_with_the_gap() {
        assert_eq!(gap_variance(1e-4, 1.0), 1e-4);
        assert_eq!(gap_variance(1e-4, 1.4), 1e-4);
        let a = gap_variance(1e-4, 10.0);
        assert!((a - (10f64.ln() / 6.0).powi(2)).abs() < 1e-15);
        assert!(gap_variance(1e-4, 100.0) > a);
    }

    #[test]
    fn gap_steps_keep_the_maximum_law() {
        use crate::numerics::{ks_critical_1pct, ks_statistic};
        let models: [Box<dyn StreamingModel>; 3] = [
            Box::new(GbmStream::new(0.2, 1e-3).unwrap().with_gap_steps()),
            Box::new(BesselStream::new(4.0, 1.0, 2e-4).unwrap().with_gap_steps()),
            Box::new(
                MmmStream::new(MmmParams::default(), 2e-4, 0.05)
                    .unwrap()
                    .with_gap_steps(),
            ),
        ];
        for m in &models {
            let u: Vec<f64> = par_paths(3000, 4, 9, |_, rng| {
                let mut s = RunningStats::new(Some(0.01), Vec::new());
                m.run(1e5, rng, &mut s);
                1.0 / s.sigma
            });
            let d = ks_statistic(&u, |x| x.clamp(0.0, 1.0)).unwrap();
            assert!(d < ks_critical_1pct(3000) + 0.01, "KS {d}");
        }
    }
}
