//! Trading strategies and their deviation processes.
//!
//! A strategy path holds the post-jump position at every node in [t0, T) plus
//! the pinned terminal position X_T = xi. Finite-variation strategies carry
//! their node jumps and the constant trading rate of each interval, because
//! their deviation obeys the forward recursion
//!
//!   dD = -D dR + gamma dX_cont,   D jumps by gamma dX at block trades,
//!
//! integrated left-point between nodes with the jump applied after the
//! continuous step. General (progressively measurable) strategies get their
//! deviation from the compounded representation
//!
//!   D_s = gamma_s X_s + nu_s^{-1} (d0 - gamma_t0 x_pre - sum_{r<s} X_r d(nu gamma)_r),
//!
//! a left-point sum over the increments carried by the path bundle. The two
//! agree on finite-variation strategies as the grid refines.
//!
//! The execution distance between strategies with the same boundary data is
//! d(X, Y) = (E[ integral (D^X - D^Y)^2 / gamma ds ])^{1/2}.

use crate::error::{Error, Result};
use crate::lq::{self, ControlSource};
use crate::mc;
use crate::model::{ModelSpec, SampledCoeffs};
use crate::path::{PathBundle, Simulator};
use crate::stats::mean_se;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    FiniteVariation,
    ProgressivelyMeasurable,
}

/// Node jumps and interval trading rates of a finite-variation strategy.
/// jumps[i] is the net block trade at node i; rates[i] is the constant
/// absolutely-continuous rate on [s_i, s_{i+1}). The closing block at T is
/// implied by the terminal target.
#[derive(Debug, Clone)]
pub struct FvStructure {
    pub jumps: Vec<f64>,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StrategyPath {
    /// Position immediately before t0.
    pub x_pre: f64,
    /// Terminal position X_T.
    pub xi: f64,
    /// Post-jump positions at nodes 0..n_steps (half-open: T excluded).
    pub values: Vec<f64>,
    pub fv: Option<FvStructure>,
}

impl StrategyPath {
    pub fn pm(x_pre: f64, values: Vec<f64>, xi: f64) -> Self {
        StrategyPath {
            x_pre,
            xi,
            values,
            fv: None,
        }
    }

    /// Build a finite-variation path from its jumps and rates.
    pub fn from_fv(x_pre: f64, xi: f64, jumps: Vec<f64>, rates: Vec<f64>, dt: f64) -> Result<Self> {
        if jumps.len() != rates.len() || jumps.is_empty() {
            return Err(Error::domain(
                "jumps and rates must have equal, nonzero length",
            ));
        }
        let n = jumps.len();
        let mut values = Vec::with_capacity(n);
        values.push(x_pre + jumps[0]);
        for i in 1..n {
            values.push(values[i - 1] + rates[i - 1] * dt + jumps[i]);
        }
        Ok(StrategyPath {
            x_pre,
            xi,
            values,
            fv: Some(FvStructure { jumps, rates }),
        })
    }

    pub fn n_steps(&self) -> usize {
        self.values.len()
    }

    /// Left limit X_{T-}.
    pub fn terminal_pre(&self, dt: f64) -> f64 {
        match &self.fv {
            Some(fv) => self.values[self.n_steps() - 1] + fv.rates[self.n_steps() - 1] * dt,
            None => self.values[self.n_steps() - 1],
        }
    }

    /// Closing block at T.
    pub fn terminal_jump(&self, dt: f64) -> f64 {
        self.xi - self.terminal_pre(dt)
    }
}

/// Per-path strategy generator. Implementations must be pure in the bundle so
/// that ensemble results are independent of path scheduling.
pub trait StrategySource: Sync {
    fn kind(&self) -> StrategyKind;
    fn realize(&self, coeffs: &SampledCoeffs, bundle: &PathBundle) -> StrategyPath;
}

/// The same deterministic path on every bundle.
#[derive(Debug, Clone)]
pub struct FixedStrategy {
    pub kind: StrategyKind,
    pub path: StrategyPath,
}

impl StrategySource for FixedStrategy {
    fn kind(&self) -> StrategyKind {
        self.kind
    }

    fn realize(&self, _coeffs: &SampledCoeffs, _bundle: &PathBundle) -> StrategyPath {
        self.path.clone()
    }
}

fn const_terminal(spec: &ModelSpec) -> Result<f64> {
    match spec.targets.terminal {
        crate::model::TerminalTarget::Const(c) => Ok(c),
        _ => Err(Error::unsupported(
            "deterministic benchmark strategies need a constant terminal target",
        )),
    }
}

/// Trade from x0 to the target at a constant rate, no blocks.
pub fn twap(spec: &ModelSpec) -> Result<FixedStrategy> {
    let xi = const_terminal(spec)?;
    let n = spec.grid.n_steps();
    let rate = (xi - spec.x0) / spec.grid.horizon();
    let path = StrategyPath::from_fv(spec.x0, xi, vec![0.0; n], vec![rate; n], spec.grid.dt())?;
    Ok(FixedStrategy {
        kind: StrategyKind::FiniteVariation,
        path,
    })
}

/// Jump to the target at t0 and hold.
pub fn close_now(spec: &ModelSpec) -> Result<FixedStrategy> {
    let xi = const_terminal(spec)?;
    let n = spec.grid.n_steps();
    let mut jumps = vec![0.0; n];
    jumps[0] = xi - spec.x0;
    let path = StrategyPath::from_fv(spec.x0, xi, jumps, vec![0.0; n], spec.grid.dt())?;
    Ok(FixedStrategy {
        kind: StrategyKind::FiniteVariation,
        path,
    })
}

/// Hold x0 and close in a single block at T.
pub fn hold_then_close(spec: &ModelSpec) -> Result<FixedStrategy> {
    let xi = const_terminal(spec)?;
    let n = spec.grid.n_steps();
    let path = StrategyPath::from_fv(spec.x0, xi, vec![0.0; n], vec![0.0; n], spec.grid.dt())?;
    Ok(FixedStrategy {
        kind: StrategyKind::FiniteVariation,
        path,
    })
}

/// Never trade: position stays x0 through T (terminal target x0).
pub fn no_trade(spec: &ModelSpec) -> FixedStrategy {
    let n = spec.grid.n_steps();
    let path = StrategyPath::from_fv(spec.x0, spec.x0, vec![0.0; n], vec![0.0; n], spec.grid.dt())
        .expect("n_steps >= 1");
    FixedStrategy {
        kind: StrategyKind::FiniteVariation,
        path,
    }
}

/// Deviation at the nodes; values[i] is post-jump, values[n] = D_T after the
/// closing block.
#[derive(Debug, Clone)]
pub struct DeviationPath {
    pub d_pre: f64,
    pub values: Vec<f64>,
}

/// Forward deviation recursion for finite-variation strategies.
pub fn deviation_fv(
    path: &StrategyPath,
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    d0: f64,
) -> Result<DeviationPath> {
    let fv = path
        .fv
        .as_ref()
        .ok_or_else(|| Error::domain("deviation_fv needs jump/rate structure"))?;
    let n = path.n_steps();
    if n != coeffs.n {
        return Err(Error::domain("strategy and grid disagree on step count"));
    }
    let dt = coeffs.dt;
    let mut values = Vec::with_capacity(n + 1);
    let mut d = d0 + bundle.gamma[0] * fv.jumps[0];
    values.push(d);
    for i in 0..n {
        let dr = bundle.resilience[i + 1] - bundle.resilience[i];
        d += -d * dr + bundle.gamma[i] * fv.rates[i] * dt;
        let jump = if i + 1 < n {
            fv.jumps[i + 1]
        } else {
            path.terminal_jump(dt)
        };
        d += bundle.gamma[i + 1] * jump;
        values.push(d);
    }
    Ok(DeviationPath { d_pre: d0, values })
}

/// Compounded deviation representation, valid for any strategy kind.
pub fn deviation_pm(
    path: &StrategyPath,
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    d0: f64,
) -> DeviationPath {
    let n = path.n_steps();
    debug_assert_eq!(n, coeffs.n);
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = d0 - bundle.gamma[0] * path.x_pre;
    for i in 0..n {
        let x = path.values[i];
        values.push(bundle.gamma[i] * x + acc / bundle.nu[i]);
        acc -= x * bundle.dnugamma[i];
    }
    values.push(bundle.gamma[n] * path.xi + acc / bundle.nu[n]);
    DeviationPath { d_pre: d0, values }
}

/// Deviation by the recursion appropriate to the strategy kind.
pub fn deviation(
    kind: StrategyKind,
    path: &StrategyPath,
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    d0: f64,
) -> Result<DeviationPath> {
    match kind {
        StrategyKind::FiniteVariation => deviation_fv(path, coeffs, bundle, d0),
        StrategyKind::ProgressivelyMeasurable => Ok(deviation_pm(path, coeffs, bundle, d0)),
    }
}

/// Scaled hidden deviation Hbar = D / sqrt(gamma) - sqrt(gamma) X at every
/// node (X_T = xi at the last one). Block trades cancel between the two terms,
/// so Hbar is insensitive to same-node round trips.
#[derive(Debug, Clone)]
pub struct HiddenDeviationPath {
    pub values: Vec<f64>,
}

pub fn hidden_deviation(
    path: &StrategyPath,
    dev: &DeviationPath,
    bundle: &PathBundle,
) -> HiddenDeviationPath {
    let n = path.n_steps();
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = if i < n { path.values[i] } else { path.xi };
        let inv_sqrt = (-0.5 * bundle.log_gamma[i]).exp();
        values.push(inv_sqrt * dev.values[i] - bundle.sqrt_gamma[i] * x);
    }
    HiddenDeviationPath { values }
}

#[derive(Debug, Clone, Copy)]
pub struct MetricEstimate {
    pub distance: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub seed: u64,
}

/// Monte-Carlo execution distance between two strategies sharing boundary
/// data. The squared distance is estimated pathwise with common random
/// numbers; the standard error is mapped through the square root by the delta
/// method.
pub fn strategy_metric(
    a: &dyn StrategySource,
    b: &dyn StrategySource,
    sim: &Simulator,
    n_paths: u64,
) -> Result<MetricEstimate> {
    let coeffs = sim.coeffs();
    let d0 = sim.spec().d0;
    let dt = coeffs.dt;
    let vals = mc::map_paths(sim, n_paths, |_, bundle| {
        let pa = a.realize(coeffs, bundle);
        let pb = b.realize(coeffs, bundle);
        let da = deviation(a.kind(), &pa, coeffs, bundle, d0).expect("fv structure");
        let db = deviation(b.kind(), &pb, coeffs, bundle, d0).expect("fv structure");
        let mut acc = 0.0;
        for i in 0..coeffs.n {
            let diff = da.values[i] - db.values[i];
            acc += diff * diff / bundle.gamma[i] * dt;
        }
        acc
    });
    let est = mean_se(&vals);
    let m = est.mean.max(0.0);
    let distance = m.sqrt();
    let std_error = if distance > 0.0 {
        est.std_error / (2.0 * distance)
    } else {
        0.0
    };
    Ok(MetricEstimate {
        distance,
        std_error,
        n_paths,
        seed: sim.seed(),
    })
}

/// Finite-variation approximation of the strategy generated by a control.
///
/// With Z the driver exponential whose log is the stochastic integral of
/// -(sigma/2 + eta rbar) against W1 minus that of eta sqrt(1-rbar^2) against
/// W2, the rescaled control v = u / Z is projected
/// onto processes constant on 2^level dyadic blocks, each block taking the
/// value of v at the left endpoint of the previous block (first block zero),
/// so the projection only looks backward. The projected control u_n = v_n Z
/// generates a finite-variation strategy with blocks exactly at the dyadic
/// boundaries; distance to the original strategy vanishes as level grows.
pub struct FvApproximation<'a> {
    control: &'a dyn ControlSource,
    spec: &'a ModelSpec,
    level: u32,
    boundaries: Vec<usize>,
}

impl<'a> FvApproximation<'a> {
    pub fn new(control: &'a dyn ControlSource, spec: &'a ModelSpec, level: u32) -> Result<Self> {
        let n = spec.grid.n_steps();
        let blocks = 1usize
            .checked_shl(level)
            .ok_or_else(|| Error::domain("level out of range"))?;
        if blocks > n {
            return Err(Error::domain(format!(
                "2^{level} blocks exceed {n} grid steps"
            )));
        }
        // boundaries[j] = first node of block j; boundaries[blocks] = n.
        let boundaries = (0..=blocks).map(|j| j * n / blocks).collect();
        Ok(FvApproximation {
            control,
            spec,
            level,
            boundaries,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }
}

impl StrategySource for FvApproximation<'_> {
    fn kind(&self) -> StrategyKind {
        StrategyKind::FiniteVariation
    }

    fn realize(&self, coeffs: &SampledCoeffs, bundle: &PathBundle) -> StrategyPath {
        let n = coeffs.n;
        let dt = coeffs.dt;
        let u = self.control.realize(coeffs, bundle).values;

        let mut z = Vec::with_capacity(n + 1);
        let mut logz = 0.0;
        z.push(1.0f64);
        for i in 0..n {
            logz -= (0.5 * coeffs.sigma[i] + coeffs.eta[i] * coeffs.rbar[i]) * bundle.dw1[i]
                + coeffs.eta_perp[i] * bundle.dw2[i];
            z.push(logz.exp());
        }

        // Block value of the projected v at each node, plus its value at T
        // (continuation of the last block).
        let blocks = self.boundaries.len() - 1;
        let block_value = |j: usize| -> f64 {
            if j == 0 {
                0.0
            } else {
                let i = self.boundaries[j - 1];
                u[i] / z[i]
            }
        };
        let mut vn = vec![0.0; n + 1];
        for j in 0..blocks {
            let val = block_value(j);
            for i in self.boundaries[j]..self.boundaries[j + 1] {
                vn[i] = val;
            }
        }
        vn[n] = block_value(blocks - 1); // last block continues through T

        let un: Vec<f64> = (0..=n).map(|i| vn[i] * z[i]).collect();
        let h = lq::integrate_state(&un, coeffs, bundle, self.spec.h0());

        let inv_sqrt: Vec<f64> = bundle.log_gamma.iter().map(|&l| (-0.5 * l).exp()).collect();
        let values: Vec<f64> = (0..n)
            .map(|i| inv_sqrt[i] * (un[i] - h.values[i]))
            .collect();
        let terminal_pre = inv_sqrt[n] * (un[n] - h.values[n]);

        let mut jumps = vec![0.0; n];
        jumps[0] = values[0] - self.spec.x0;
        for j in 1..blocks {
            let i = self.boundaries[j];
            if i < n {
                jumps[i] = inv_sqrt[i] * z[i] * (block_value(j) - block_value(j - 1));
            }
        }
        let mut rates = vec![0.0; n];
        for i in 0..n {
            let next_pre = if i + 1 < n {
                values[i + 1] - jumps[i + 1]
            } else {
                terminal_pre
            };
            rates[i] = (next_pre - values[i]) / dt;
        }

        let xi = bundle.terminal_target(self.spec);
        StrategyPath {
            x_pre: self.spec.x0,
            xi,
            values,
            fv: Some(FvStructure { jumps, rates }),
        }
    }
}
