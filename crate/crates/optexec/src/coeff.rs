//! Deterministic model coefficients.
//!
//! A coefficient is either a constant or a deterministic function of time.
//! SDE discretizations sample coefficients at left nodes; the backward ODE
//! solver additionally evaluates them at stage midpoints, which is why the
//! function-backed variant must be evaluable at arbitrary times rather than
//! pre-sampled on one grid.

use crate::rng::{CounterRng, SLOT_BRIDGE};
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    TimeFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Coefficient::Constant(c)
    }

    pub fn time_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::TimeFn(Arc::new(f))
    }

    pub fn at(&self, s: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::TimeFn(f) => f(s),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Coefficient::Constant(c) => Some(*c),
            Coefficient::TimeFn(_) => None,
        }
    }

    pub fn sample(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&s| self.at(s)).collect()
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::TimeFn(_) => write!(f, "TimeFn(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

/// A fixed, reproducible rough path usable as a drift coefficient: the
/// Schauder (midpoint) expansion of a Brownian bridge on [t0, t0 + horizon],
/// truncated at `levels` dyadic levels, scaled, then clipped to
/// [-clip, +clip] so boundedness assumptions hold.
///
/// Values are a pure function of (seed, time), so refining a sampling grid
/// reveals genuine detail down to scale horizon * 2^-levels instead of
/// redrawing the path, and nested grids see consistent restrictions. Node
/// total variation grows like sqrt(n) until that scale is resolved, which is
/// exactly the infinite-variation texture the rough-drift examples need.
pub fn clipped_bridge(
    seed: u64,
    levels: u32,
    scale: f64,
    clip: f64,
    t0: f64,
    horizon: f64,
) -> Coefficient {
    assert!(levels > 0 && levels < 32);
    assert!(horizon > 0.0 && clip > 0.0);
    let rng = CounterRng::new(seed);
    Coefficient::time_fn(move |s| {
        let u = ((s - t0) / horizon).clamp(0.0, 1.0);
        let mut acc = 0.0;
        for level in 0..levels {
            let blocks = 1u64 << level;
            let j = ((u * blocks as f64) as u64).min(blocks - 1);
            let v = u * blocks as f64 - j as f64;
            // Schauder hat: peak 1/2 at the block midpoint, zero at the ends.
            let hat = v.min(1.0 - v);
            if hat > 0.0 {
                let z = rng.normal(level as u64, j as u32, SLOT_BRIDGE);
                acc += z * hat / (blocks as f64).sqrt();
            }
        }
        (scale * acc).clamp(-clip, clip)
    })
}
