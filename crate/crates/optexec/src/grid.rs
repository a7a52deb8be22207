use crate::error::{Error, Result};

/// Uniform time grid on [t0, t0 + horizon] with `n_steps` intervals.
///
/// Node i is `t0 + horizon * i / n_steps`, so the final node is the horizon
/// end exactly. State arrays hold n_steps + 1 node values; increment arrays
/// hold n_steps entries. Integrals over [t0, T) are left-point sums over
/// nodes 0..n_steps, matching the half-open sampling convention used by every
/// path functional in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, horizon: f64, n_steps: usize) -> Result<Self> {
        if !t0.is_finite() || !horizon.is_finite() {
            return Err(Error::domain("time grid bounds must be finite"));
        }
        if horizon <= 0.0 {
            return Err(Error::domain(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::domain("grid needs at least one step"));
        }
        Ok(TimeGrid {
            t0,
            horizon,
            n_steps,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_steps);
        self.t0 + self.horizon * (i as f64 / self.n_steps as f64)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.node(i)).collect()
    }

    /// Same span with `factor` times as many steps.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        let steps = self
            .n_steps
            .checked_mul(factor)
            .ok_or_else(|| Error::domain("refined grid overflows"))?;
        TimeGrid::new(self.t0, self.horizon, steps)
    }

    /// Node index closest to time s (clamped to the grid).
    pub fn nearest_node(&self, s: f64) -> usize {
        let raw = (s - self.t0) / self.dt();
        raw.round().clamp(0.0, self.n_steps as f64) as usize
    }
}
