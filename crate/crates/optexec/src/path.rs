//! Path simulation.
//!
//! Each Monte-Carlo path carries the increments of the two model drivers plus
//! an auxiliary driver for random terminal targets, and the processes built
//! from them:
//!
//! - gamma, the impact scale, via its exact log-space solution
//!   gamma_s = gamma0 exp(sum (mu - sigma^2/2) dt + sum sigma dW1),
//! - R, the resilience, by left-point Euler (exact at nodes: no state feedback),
//! - nu = exp(R + [R]/2), the resilience compounding factor, exact,
//! - the left-point increments of nu gamma used by deviation accumulation,
//! - optionally the terminal-target forecast E_s[xi].
//!
//! gamma and nu are exponentials of grid sums rather than Euler products, so
//! positivity can never fail and identities that hinge on exponent
//! cancellation survive in floating point.

use crate::error::Result;
use crate::model::{ModelSpec, SampledCoeffs, TerminalTarget};
use crate::rng::{CounterRng, SLOT_W12, SLOT_W3};
use std::sync::Arc;

/// Increments of the three Brownian drivers over one grid.
#[derive(Debug, Clone)]
pub struct BrownianIncrements {
    pub dw1: Vec<f64>,
    pub dw2: Vec<f64>,
    pub dw3: Vec<f64>,
}

/// Draw the n-step increment triple for one path. Pure in
/// (seed, path, step), hence thread-schedule invariant.
pub fn simulate_brownian(seed: u64, path: u64, n: usize, dt: f64) -> BrownianIncrements {
    let rng = CounterRng::new(seed);
    let scale = dt.sqrt();
    let mut dw1 = Vec::with_capacity(n);
    let mut dw2 = Vec::with_capacity(n);
    let mut dw3 = Vec::with_capacity(n);
    for step in 0..n {
        let (z1, z2) = rng.normal_pair(path, step as u32, SLOT_W12);
        let z3 = rng.normal(path, step as u32, SLOT_W3);
        dw1.push(scale * z1);
        dw2.push(scale * z2);
        dw3.push(scale * z3);
    }
    BrownianIncrements { dw1, dw2, dw3 }
}

/// Impact scale gamma at the nodes, with its log returned alongside so
/// downstream square roots can stay in exponent space.
pub fn build_gamma(coeffs: &SampledCoeffs, gamma0: f64, dw1: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = coeffs.n;
    let dt = coeffs.dt;
    let mut log_gamma = Vec::with_capacity(n + 1);
    let mut acc = gamma0.ln();
    log_gamma.push(acc);
    for i in 0..n {
        acc += (coeffs.mu[i] - 0.5 * coeffs.sigma[i] * coeffs.sigma[i]) * dt
            + coeffs.sigma[i] * dw1[i];
        log_gamma.push(acc);
    }
    let gamma = log_gamma.iter().map(|&l| l.exp()).collect();
    (gamma, log_gamma)
}

/// Resilience R at the nodes: R_{i+1} = R_i + rho dt + eta dWR with
/// dWR = rbar dW1 + sqrt(1 - rbar^2) dW2 read at left nodes.
pub fn build_resilience(coeffs: &SampledCoeffs, dw1: &[f64], dw2: &[f64]) -> Vec<f64> {
    let n = coeffs.n;
    let dt = coeffs.dt;
    let mut r = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    r.push(acc);
    for i in 0..n {
        let dwr = coeffs.rbar[i] * dw1[i]
            + (1.0 - coeffs.rbar[i] * coeffs.rbar[i]).max(0.0).sqrt() * dw2[i];
        acc += coeffs.rho[i] * dt + coeffs.eta[i] * dwr;
        r.push(acc);
    }
    r
}

/// Compounding factor nu = exp(R + [R]/2), the stochastic exponential of
/// R + [R]; exact given the node values of R.
pub fn build_nu(coeffs: &SampledCoeffs, resilience: &[f64]) -> Vec<f64> {
    let n = coeffs.n;
    let dt = coeffs.dt;
    let mut nu = Vec::with_capacity(n + 1);
    let mut half_qv = 0.0;
    nu.push((resilience[0] + half_qv).exp());
    for i in 0..n {
        half_qv += 0.5 * coeffs.eta[i] * coeffs.eta[i] * dt;
        nu.push((resilience[i + 1] + half_qv).exp());
    }
    nu
}

/// Left-point increments of nu gamma:
/// nu gamma [(mu + rho + eta^2 + sigma eta rbar) dt + (sigma + eta rbar) dW1
///           + eta sqrt(1 - rbar^2) dW2].
pub fn build_nugamma_increments(
    coeffs: &SampledCoeffs,
    gamma: &[f64],
    nu: &[f64],
    dw1: &[f64],
    dw2: &[f64],
) -> Vec<f64> {
    let n = coeffs.n;
    let dt = coeffs.dt;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let drift = coeffs.mu[i]
            + coeffs.rho[i]
            + coeffs.eta[i] * coeffs.eta[i]
            + coeffs.sigma[i] * coeffs.eta[i] * coeffs.rbar[i];
        out.push(
            nu[i]
                * gamma[i]
                * (drift * dt + coeffs.sig_eff[i] * dw1[i] + coeffs.eta_perp[i] * dw2[i]),
        );
    }
    out
}

/// Everything one path contributes to an ensemble computation.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub dw1: Vec<f64>,
    pub dw2: Vec<f64>,
    pub dw3: Vec<f64>,
    pub gamma: Vec<f64>,
    pub log_gamma: Vec<f64>,
    pub sqrt_gamma: Vec<f64>,
    pub resilience: Vec<f64>,
    pub nu: Vec<f64>,
    pub dnugamma: Vec<f64>,
    /// E_s[xi] at the nodes when the target family needs it.
    pub target_forecast: Option<Vec<f64>>,
}

impl PathBundle {
    /// Build all derived processes from given increments. Tests use this to
    /// drive the same noise through different grids or models.
    pub fn from_increments(
        spec: &ModelSpec,
        coeffs: &SampledCoeffs,
        inc: BrownianIncrements,
    ) -> PathBundle {
        let (gamma, log_gamma) = build_gamma(coeffs, spec.gamma0, &inc.dw1);
        let sqrt_gamma = log_gamma.iter().map(|&l| (0.5 * l).exp()).collect();
        let resilience = build_resilience(coeffs, &inc.dw1, &inc.dw2);
        let nu = build_nu(coeffs, &resilience);
        let dnugamma = build_nugamma_increments(coeffs, &gamma, &nu, &inc.dw1, &inc.dw2);
        let target_forecast = if spec.needs_target_driver() {
            let (base, slope) = match spec.targets.terminal {
                TerminalTarget::Const(c) => (c, 0.0),
                TerminalTarget::LinearInDriver { base, slope } => (base, slope),
            };
            let mut w3 = 0.0;
            let mut forecast = Vec::with_capacity(coeffs.n + 1);
            forecast.push(base);
            for i in 0..coeffs.n {
                w3 += inc.dw3[i];
                forecast.push(base + slope * w3);
            }
            Some(forecast)
        } else {
            None
        };
        PathBundle {
            dw1: inc.dw1,
            dw2: inc.dw2,
            dw3: inc.dw3,
            gamma,
            log_gamma,
            sqrt_gamma,
            resilience,
            nu,
            dnugamma,
            target_forecast,
        }
    }

    /// Terminal target value realized on this path.
    pub fn terminal_target(&self, spec: &ModelSpec) -> f64 {
        match spec.targets.terminal {
            TerminalTarget::Const(c) => c,
            TerminalTarget::LinearInDriver { .. } => self
                .target_forecast
                .as_ref()
                .expect("forecast missing for random target")[self.gamma.len() - 1],
        }
    }
}

/// Deterministic path factory: same (spec, seed, path index) always yields
/// the same bundle.
#[derive(Clone)]
pub struct Simulator {
    spec: Arc<ModelSpec>,
    coeffs: Arc<SampledCoeffs>,
    seed: u64,
}

impl Simulator {
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let coeffs = Arc::new(spec.sample());
        Ok(Simulator {
            spec: Arc::new(spec),
            coeffs,
            seed,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &SampledCoeffs {
        &self.coeffs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bundle(&self, path: u64) -> PathBundle {
        let inc = simulate_brownian(
            self.seed,
            path,
            self.spec.grid.n_steps(),
            self.spec.grid.dt(),
        );
        PathBundle::from_increments(&self.spec, &self.coeffs, inc)
    }
}

/// Sum consecutive groups of `factor` fine increments into coarse ones.
pub fn coarsen_increments(fine: &[f64], factor: usize) -> Vec<f64> {
    assert!(factor > 0 && fine.len().is_multiple_of(factor));
    fine.chunks(factor).map(|c| c.iter().sum()).collect()
}
