//! Uniform discretization of the `(t, a)` rectangle and the state stored on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform age grid `a_k = k·Δa`, `k = 0..=intervals`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeGrid {
    pub max_age: f64,
    pub intervals: usize,
}

impl AgeGrid {
    pub fn new(max_age: f64, intervals: usize) -> Result<Self> {
        if !(max_age.is_finite() && max_age > 0.0) {
            return Err(Error::InvalidGrid(format!("max age must be > 0, got {max_age}")));
        }
        if intervals < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 age intervals, got {intervals}"
            )));
        }
        Ok(Self { max_age, intervals })
    }

    pub fn step(&self) -> f64 {
        self.max_age / self.intervals as f64
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn age(&self, k: usize) -> f64 {
        k as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.age(k)).collect()
    }
}

/// Full space-time grid. Construction enforces `Δt < Δa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ages: AgeGrid,
    pub max_time: f64,
    pub time_steps: usize,
}

impl GridSpec {
    pub fn new(max_age: f64, max_time: f64, age_intervals: usize, time_steps: usize) -> Result<Self> {
        let ages = AgeGrid::new(max_age, age_intervals)?;
        if !(max_time.is_finite() && max_time > 0.0) {
            return Err(Error::InvalidGrid(format!("max time must be > 0, got {max_time}")));
        }
        if time_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 time steps, got {time_steps}"
            )));
        }
        let grid = Self {
            ages,
            max_time,
            time_steps,
        };
        if grid.dt() >= grid.da() {
            return Err(Error::InvalidGrid(format!(
                "CFL requires dt < da (dt = {}, da = {})",
                grid.dt(),
                grid.da()
            )));
        }
        Ok(grid)
    }

    /// Smallest number of time steps whose step does not exceed `max_dt`.
    pub fn with_max_dt(max_age: f64, max_time: f64, age_intervals: usize, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0) {
            return Err(Error::InvalidGrid(format!("max dt must be > 0, got {max_dt}")));
        }
        let mut steps = ((max_time / max_dt).ceil() as usize).max(2);
        if max_time / steps as f64 > max_dt {
            steps += 1;
        }
        Self::new(max_age, max_time, age_intervals, steps)
    }

    pub fn da(&self) -> f64 {
        self.ages.step()
    }

    pub fn dt(&self) -> f64 {
        self.max_time / self.time_steps as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }
}

/// The three fractions at one time level, sampled on the age grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgeState {
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
}

impl AgeState {
    /// Infection-free row `s ≡ 1`.
    pub fn infection_free(len: usize) -> Self {
        Self {
            s: vec![1.0; len],
            i: vec![0.0; len],
            r: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn max_sum_defect(&self) -> f64 {
        self.s
            .iter()
            .zip(&self.i)
            .zip(&self.r)
            .map(|((s, i), r)| (s + i + r - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest entry across the three compartments and its node index.
    pub fn min_entry(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for k in 0..self.len() {
            let m = self.s[k].min(self.i[k]).min(self.r[k]);
            if m < best.0 {
                best = (m, k);
            }
        }
        best
    }
}

/// `(s, i, r)` on stored time levels. Rows are kept every `stride` steps plus
/// the final one; `times[n]` is the time of stored row `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub times: Vec<f64>,
    pub rows: Vec<AgeState>,
}

impl StateField {
    pub fn last(&self) -> &AgeState {
        self.rows.last().expect("a state field always holds the initial row")
    }
}
