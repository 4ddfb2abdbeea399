use std::sync::Arc;

use crate::error::{invalid, Result};

/// Simulation times `0 = t_0 < t_1 < … < t_n = T`. Cloning is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Arc<Vec<f64>>,
    max_step: f64,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, dt: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || !(dt > 0.0) {
            return Err(invalid(format!(
                "uniform grid needs T > 0 and dt > 0, got T = {horizon}, dt = {dt}"
            )));
        }
        let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
        let h = horizon / steps as f64;
        let times = (0..=steps)
            .map(|i| if i == steps { horizon } else { i as f64 * h })
            .collect();
        Self::from_times(times)
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(invalid("time grid must start at 0 and contain at least two points"));
        }
        let mut max_step: f64 = 0.0;
        for w in times.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(invalid(format!("time grid not strictly increasing at {}", w[1])));
            }
            max_step = max_step.max(w[1] - w[0]);
        }
        Ok(TimeGrid {
            times: Arc::new(times),
            max_step,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn max_step(&self) -> f64 {
        self.max_step
    }

    /// Number of grid points, one more than the number of steps.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn dt(&self, step: usize) -> f64 {
        self.times[step + 1] - self.times[step]
    }

    /// Every point of `coarse` is also a point of `self`.
    pub fn is_refinement_of(&self, coarse: &TimeGrid) -> bool {
        self.indices_of(coarse).is_some()
    }

    /// Positions of the points of `coarse` within this grid.
    pub fn indices_of(&self, coarse: &TimeGrid) -> Option<Vec<usize>> {
        let tol = 1e-12 * self.horizon().max(1.0);
        let mut out = Vec::with_capacity(coarse.len());
        let mut j = 0;
        for &t in coarse.times() {
            while j < self.len() && self.times[j] < t - tol {
                j += 1;
            }
            if j == self.len() || (self.times[j] - t).abs() > tol {
                return None;
            }
            out.push(j);
        }
        Some(out)
    }

    /// Keeps every `factor`-th point (and the horizon).
    pub fn coarsen(&self, factor: usize) -> Result<TimeGrid> {
        if factor == 0 {
            return Err(invalid("coarsening factor must be positive"));
        }
        let mut times: Vec<f64> = self.times.iter().copied().step_by(factor).collect();
        if *times.last().unwrap() != self.horizon() {
            times.push(self.horizon());
        }
        TimeGrid::from_times(times)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid() {
        let g = TimeGrid::uniform(1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.horizon(), 1.0);
        assert!((g.max_step() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn nesting() {
        let fine = TimeGrid::uniform(1.0, 0.01).unwrap();
        let coarse = fine.coarsen(4).unwrap();
        assert!(fine.is_refinement_of(&coarse));
        assert!(!coarse.is_refinement_of(&fine));
        let off = TimeGrid::from_times(vec![0.0, 0.333, 1.0]).unwrap();
        assert!(!fine.is_refinement_of(&off));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::from_times(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::from_times(vec![0.1, 0.5]).is_err());
        assert!(TimeGrid::uniform(1.0, 0.0).is_err());
    }
}
