//! Model specification: dynamics coefficients, boundary data, and targets.
//!
//! The execution problem is driven by two correlated Brownian motions. The
//! impact scale gamma follows dgamma = gamma (mu ds + sigma dW1) from
//! gamma(t0) = gamma0 > 0; the resilience process R follows
//! dR = rho ds + eta dWR with dWR = rbar dW1 + sqrt(1 - rbar^2) dW2 and
//! R(t0) = 0. A strategy starts from position x0 with inherited deviation d0,
//! must end at the terminal target xi, and is optionally pulled toward a
//! running target zeta by the risk weight lambda >= 0.

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::PathBundle;

/// Terminal position target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalTarget {
    Const(f64),
    /// base + slope * W3_T for an auxiliary driver W3 independent of (W1, W2).
    /// Its conditional expectation at time s is base + slope * W3_s.
    LinearInDriver {
        base: f64,
        slope: f64,
    },
}

impl TerminalTarget {
    pub fn is_random(&self) -> bool {
        matches!(self, TerminalTarget::LinearInDriver { slope, .. } if *slope != 0.0)
    }

    /// E[target] at time t0.
    pub fn initial_expectation(&self) -> f64 {
        match self {
            TerminalTarget::Const(c) => *c,
            TerminalTarget::LinearInDriver { base, .. } => *base,
        }
    }
}

/// Running position target inside the risk term lambda gamma (X - zeta)^2.
#[derive(Debug, Clone)]
pub enum RunningTarget {
    Zero,
    Deterministic(Coefficient),
    /// zeta_s = E_s[xi], the conditional expectation path of the terminal
    /// target; per path this is the same array as the target forecast.
    ExpectedTerminal,
}

#[derive(Debug, Clone)]
pub struct TargetSpec {
    pub terminal: TerminalTarget,
    pub running: RunningTarget,
}

impl TargetSpec {
    pub fn liquidate() -> Self {
        TargetSpec {
            terminal: TerminalTarget::Const(0.0),
            running: RunningTarget::Zero,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub grid: TimeGrid,
    pub gamma0: f64,
    pub mu: Coefficient,
    pub sigma: Coefficient,
    pub rho: Coefficient,
    pub eta: Coefficient,
    pub rbar: Coefficient,
    pub lambda: Coefficient,
    pub targets: TargetSpec,
    /// Position immediately before t0.
    pub x0: f64,
    /// Deviation immediately before t0.
    pub d0: f64,
}

impl ModelSpec {
    /// All-constant coefficients; the common case for configured runs.
    #[allow(clippy::too_many_arguments)]
    pub fn with_constants(
        grid: TimeGrid,
        gamma0: f64,
        mu: f64,
        sigma: f64,
        rho: f64,
        eta: f64,
        rbar: f64,
        lambda: f64,
        targets: TargetSpec,
        x0: f64,
        d0: f64,
    ) -> Result<Self> {
        let spec = ModelSpec {
            grid,
            gamma0,
            mu: mu.into(),
            sigma: sigma.into(),
            rho: rho.into(),
            eta: eta.into(),
            rbar: rbar.into(),
            lambda: lambda.into(),
            targets,
            x0,
            d0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return Err(Error::domain(format!(
                "gamma0 must be positive and finite, got {}",
                self.gamma0
            )));
        }
        if !self.x0.is_finite() || !self.d0.is_finite() {
            return Err(Error::domain("x0 and d0 must be finite"));
        }
        for (name, c) in [
            ("mu", &self.mu),
            ("sigma", &self.sigma),
            ("rho", &self.rho),
            ("eta", &self.eta),
            ("rbar", &self.rbar),
            ("lambda", &self.lambda),
        ] {
            for &s in &self.grid.nodes() {
                let v = c.at(s);
                if !v.is_finite() {
                    return Err(Error::domain(format!("{name}({s}) is not finite")));
                }
                if name == "rbar" && v.abs() > 1.0 {
                    return Err(Error::domain(format!(
                        "|rbar({s})| = {} exceeds 1",
                        v.abs()
                    )));
                }
                if name == "lambda" && v < 0.0 {
                    return Err(Error::domain(format!("lambda({s}) = {v} is negative")));
                }
            }
        }
        Ok(())
    }

    /// Initial value of the scaled hidden deviation, d0 / sqrt(gamma0) - sqrt(gamma0) x0.
    pub fn h0(&self) -> f64 {
        self.d0 / self.gamma0.sqrt() - self.gamma0.sqrt() * self.x0
    }

    pub fn sample(&self) -> SampledCoeffs {
        SampledCoeffs::new(self)
    }

    /// True when the terminal target or the running target needs the W3
    /// forecast path.
    pub fn needs_target_driver(&self) -> bool {
        self.targets.terminal.is_random()
            || matches!(self.targets.running, RunningTarget::ExpectedTerminal)
    }
}

/// Coefficients sampled at the grid nodes, plus the derived combinations that
/// the discretizations reuse. All arrays have n_steps + 1 entries and are read
/// at left nodes by the integrators.
#[derive(Debug, Clone)]
pub struct SampledCoeffs {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rho: Vec<f64>,
    pub eta: Vec<f64>,
    pub rbar: Vec<f64>,
    pub lambda: Vec<f64>,
    /// sigma + eta rbar: the W1 loading shared by gamma and the resilience part
    /// that co-moves with it.
    pub sig_eff: Vec<f64>,
    /// eta sqrt(1 - rbar^2): the W2-only loading of the resilience.
    pub eta_perp: Vec<f64>,
    /// sigma^2 + 2 sigma eta rbar + eta^2, the squared total noise loading.
    pub quad: Vec<f64>,
    /// rho + mu - (sigma^2 + sigma eta rbar) / 2, the mean-reversion strength
    /// of the scaled hidden deviation.
    pub alpha: Vec<f64>,
    /// Running target samples; None when the running target is the
    /// conditional-expectation path of the terminal target (per-path data).
    pub zeta: Option<Vec<f64>>,
}

impl SampledCoeffs {
    fn new(spec: &ModelSpec) -> Self {
        let nodes = spec.grid.nodes();
        let n = spec.grid.n_steps();
        let mu = spec.mu.sample(&nodes);
        let sigma = spec.sigma.sample(&nodes);
        let rho = spec.rho.sample(&nodes);
        let eta = spec.eta.sample(&nodes);
        let rbar = spec.rbar.sample(&nodes);
        let lambda = spec.lambda.sample(&nodes);
        let mut sig_eff = Vec::with_capacity(n + 1);
        let mut eta_perp = Vec::with_capacity(n + 1);
        let mut quad = Vec::with_capacity(n + 1);
        let mut alpha = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let se = sigma[i] + eta[i] * rbar[i];
            let ep = eta[i] * (1.0 - rbar[i] * rbar[i]).max(0.0).sqrt();
            sig_eff.push(se);
            eta_perp.push(ep);
            quad.push(se * se + ep * ep);
            alpha.push(rho[i] + mu[i] - (sigma[i] * sigma[i] + sigma[i] * eta[i] * rbar[i]) / 2.0);
        }
        let zeta = match &spec.targets.running {
            RunningTarget::Zero => Some(vec![0.0; n + 1]),
            RunningTarget::Deterministic(c) => Some(c.sample(&nodes)),
            RunningTarget::ExpectedTerminal => None,
        };
        SampledCoeffs {
            t0: spec.grid.t0(),
            dt: spec.grid.dt(),
            n,
            mu,
            sigma,
            rho,
            eta,
            rbar,
            lambda,
            sig_eff,
            eta_perp,
            quad,
            alpha,
            zeta,
        }
    }

    /// Per-path running-target nodes: the sampled array, or the terminal
    /// target forecast when the running target tracks it.
    pub fn zeta_nodes<'a>(&'a self, bundle: &'a PathBundle) -> &'a [f64] {
        match &self.zeta {
            Some(z) => z,
            None => bundle.target_forecast.as_ref().expect(
                "bundle built without target forecast for an expected-terminal running target",
            ),
        }
    }
}
