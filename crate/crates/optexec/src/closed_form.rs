//! Closed-form benchmark families.
//!
//! Five parameter families admit explicit solutions and serve as oracles for
//! the numerical solver:
//!
//! * `OwDeterministic`: block-decay order book (mu = sigma = eta = 0,
//!   constant rho > 0, constant lambda >= 0). K has a tanh form for
//!   lambda > 0 and equals 1 / (2 + (T-s) rho) for lambda = 0; the optimal
//!   strategy is two blocks plus a linear program.
//! * `OwRandomTarget`: the same order book with a terminal target driven by
//!   the independent W3; the optimal strategy is the deterministic profile
//!   aimed at E_0[xi] plus a stochastic integral of target updates.
//! * `RoughDrift`: sigma = eta = lambda = 0 with a drift mu of unbounded
//!   variation (clipped Schauder bridge). K and the optimal strategy stay
//!   explicit; the feedback gain theta inherits the roughness, so no
//!   finite-variation execution strategy attains the infimum.
//! * `DiffusiveResilience`: mu = lambda = 0 with constant sigma, eta, rbar
//!   making kappa > 0 and q = sigma^2 + 2 sigma eta rbar + eta^2 > 0. K is a
//!   reciprocal Lambert-W expression and the optimal strategy a stochastic
//!   exponential in both drivers.
//! * `NoiseCancellation`: eta = sigma with rbar = -1, so q = 0 and
//!   kappa = rho. The impact noise cancels out of the optimal strategy, which
//!   is the deterministic block-decay profile, while the deviation stays
//!   stochastic.
//!
//! All quadratures here are trapezoidal on the same half-step tabulation the
//! Riccati integrator uses, so cross-checks compare discretizations of equal
//! information content. Gamma for lambda > 0 has no elementary antiderivative
//! and is quadrature-defined; the lambda = 0 closed form serves as its error
//! budget.

use crate::coeff::{clipped_bridge, Coefficient};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::lambert::lambert_w0;
use crate::model::{ModelSpec, RunningTarget, TargetSpec, TerminalTarget};
use crate::strategy::StrategyPath;

/// Fixed Schauder-bridge parameters of the rough-drift family. The seed is
/// arbitrary but frozen: the family is a specific function, not an ensemble.
pub const BRIDGE_SEED: u64 = 7;
pub const BRIDGE_LEVELS: u32 = 14;
pub const BRIDGE_SCALE: f64 = 0.35;
pub const BRIDGE_CLIP: f64 = 0.5;

const QUAD_REFINE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    OwDeterministic,
    OwRandomTarget,
    RoughDrift,
    DiffusiveResilience,
    NoiseCancellation,
}

impl ExampleKind {
    pub fn all() -> [ExampleKind; 5] {
        [
            ExampleKind::OwDeterministic,
            ExampleKind::OwRandomTarget,
            ExampleKind::RoughDrift,
            ExampleKind::DiffusiveResilience,
            ExampleKind::NoiseCancellation,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExampleKind::OwDeterministic => "ow",
            ExampleKind::OwRandomTarget => "ow-random-target",
            ExampleKind::RoughDrift => "rough-drift",
            ExampleKind::DiffusiveResilience => "diffusive-resilience",
            ExampleKind::NoiseCancellation => "noise-cancellation",
        }
    }

    pub fn from_name(name: &str) -> Result<ExampleKind> {
        ExampleKind::all()
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown example '{name}'; available: {}",
                    ExampleKind::all().map(|k| k.name()).join(", ")
                ))
            })
    }

    pub fn describe(&self) -> &'static str {
        match self {
            ExampleKind::OwDeterministic => {
                "block-decay order book, deterministic optimal strategy"
            }
            ExampleKind::OwRandomTarget => "block-decay order book, terminal target driven by W3",
            ExampleKind::RoughDrift => {
                "rough impact drift; no finite-variation strategy is optimal"
            }
            ExampleKind::DiffusiveResilience => "diffusive resilience; Lambert-W value coefficient",
            ExampleKind::NoiseCancellation => {
                "impact noise cancelled by resilience noise; deterministic strategy"
            }
        }
    }
}

/// A fully specified benchmark instance. The defaults put every family on
/// x0 = 1, d0 = 0.2 gamma0, rho = 1, T = 1.
#[derive(Debug, Clone)]
pub struct ExampleConfig {
    pub kind: ExampleKind,
    pub n_steps: usize,
    pub x0: f64,
    pub d0: f64,
    pub gamma0: f64,
    pub rho: f64,
    pub horizon: f64,
}

impl ExampleConfig {
    pub fn new(kind: ExampleKind, n_steps: usize) -> Self {
        ExampleConfig {
            kind,
            n_steps,
            x0: 1.0,
            d0: 0.2,
            gamma0: 1.0,
            rho: 1.0,
            horizon: 1.0,
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let grid = TimeGrid::new(0.0, self.horizon, self.n_steps)?;
        let liq = TargetSpec::liquidate();
        match self.kind {
            ExampleKind::OwDeterministic => ModelSpec::with_constants(
                grid,
                self.gamma0,
                0.0,
                0.0,
                self.rho,
                0.0,
                0.0,
                0.0,
                liq,
                self.x0,
                self.d0,
            ),
            ExampleKind::OwRandomTarget => {
                let targets = TargetSpec {
                    terminal: TerminalTarget::LinearInDriver {
                        base: 0.0,
                        slope: 0.5,
                    },
                    running: RunningTarget::Zero,
                };
                ModelSpec::with_constants(
                    grid,
                    self.gamma0,
                    0.0,
                    0.0,
                    self.rho,
                    0.0,
                    0.0,
                    0.0,
                    targets,
                    self.x0,
                    self.d0,
                )
            }
            ExampleKind::RoughDrift => {
                let mut spec = ModelSpec::with_constants(
                    grid,
                    self.gamma0,
                    0.0,
                    0.0,
                    self.rho,
                    0.0,
                    0.0,
                    0.0,
                    liq,
                    self.x0,
                    self.d0,
                )?;
                spec.mu = rough_drift_mu(0.0, self.horizon);
                Ok(spec)
            }
            ExampleKind::DiffusiveResilience => ModelSpec::with_constants(
                grid,
                self.gamma0,
                0.0,
                0.0,
                self.rho,
                1.0,
                0.0,
                0.0,
                liq,
                self.x0,
                self.d0,
            ),
            ExampleKind::NoiseCancellation => ModelSpec::with_constants(
                grid,
                self.gamma0,
                0.0,
                0.5,
                self.rho,
                0.5,
                -1.0,
                0.0,
                liq,
                self.x0,
                self.d0,
            ),
        }
    }
}

/// The frozen rough drift of the `RoughDrift` family.
pub fn rough_drift_mu(t0: f64, horizon: f64) -> Coefficient {
    clipped_bridge(
        BRIDGE_SEED,
        BRIDGE_LEVELS,
        BRIDGE_SCALE,
        BRIDGE_CLIP,
        t0,
        horizon,
    )
}

/// K for the block-decay order book at the given times.
pub fn ow_k(rho: f64, lambda: f64, t0: f64, horizon: f64, times: &[f64]) -> Vec<f64> {
    let t_end = t0 + horizon;
    if lambda > 0.0 {
        let root = (lambda * (rho + lambda)).sqrt();
        times
            .iter()
            .map(|&s| {
                let th = ((lambda.sqrt() * rho * (t_end - s)) / (lambda + rho).sqrt()).tanh();
                0.5 * (lambda * th + root) / ((0.5 * rho + lambda) * th + root)
            })
            .collect()
    } else {
        times
            .iter()
            .map(|&s| 1.0 / (2.0 + (t_end - s) * rho))
            .collect()
    }
}

/// Gamma for the block-decay order book,
/// exp(-rho/(lambda+rho) (lambda s + rho int_0^s K)), by trapezoid on a
/// refined internal grid. For lambda = 0 this reduces to
/// (2 + (T-s) rho) / (2 + T rho).
pub fn ow_gamma(rho: f64, lambda: f64, t0: f64, horizon: f64, times: &[f64]) -> Vec<f64> {
    let n = (times.len() - 1) * QUAD_REFINE;
    let h = horizon / n as f64;
    let fine: Vec<f64> = (0..=n).map(|j| t0 + h * j as f64).collect();
    let k = ow_k(rho, lambda, t0, horizon, &fine);
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0f64);
    for j in 0..n {
        cum.push(cum[j] + 0.5 * h * (k[j] + k[j + 1]));
    }
    times
        .iter()
        .map(|&s| {
            let rel = ((s - t0) / h).round() as usize;
            (-(rho / (lambda + rho)) * (lambda * (s - t0) + rho * cum[rel])).exp()
        })
        .collect()
}

/// psi for the block-decay order book with a constant terminal target and a
/// deterministic running target, by the same internal quadrature as
/// `ow_gamma`.
#[allow(clippy::too_many_arguments)]
pub fn ow_psi_deterministic(
    rho: f64,
    lambda: f64,
    gamma0: f64,
    xi: f64,
    zeta: &Coefficient,
    t0: f64,
    horizon: f64,
    times: &[f64],
) -> Vec<f64> {
    let n = (times.len() - 1) * QUAD_REFINE;
    let h = horizon / n as f64;
    let fine: Vec<f64> = (0..=n).map(|j| t0 + h * j as f64).collect();
    let k = ow_k(rho, lambda, t0, horizon, &fine);
    let gam = ow_gamma(rho, lambda, t0, horizon, &fine);
    let integrand: Vec<f64> = (0..=n)
        .map(|j| gam[j] * (1.0 - k[j]) * zeta.at(fine[j]))
        .collect();
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + 0.5 * h * (integrand[j] + integrand[j + 1]);
    }
    let gamma_t = gam[n];
    times
        .iter()
        .map(|&s| {
            let rel = ((s - t0) / h).round() as usize;
            gamma0.sqrt() / gam[rel]
                * (-0.5 * gamma_t * xi - rho * lambda / (lambda + rho) * suffix[rel])
        })
        .collect()
}

/// Deterministic optimal execution profile for the block-decay order book
/// without a running penalty: two blocks and a linear program toward xi.
#[allow(clippy::too_many_arguments)]
pub fn ow_strategy_deterministic(
    x: f64,
    xi: f64,
    d: f64,
    gamma0: f64,
    rho: f64,
    t0: f64,
    horizon: f64,
    times: &[f64],
) -> Vec<f64> {
    let t_end = t0 + horizon;
    times
        .iter()
        .map(|&s| (x - xi - d / gamma0) * (1.0 + (t_end - s) * rho) / (2.0 + horizon * rho) + xi)
        .collect()
}

/// Optimal strategy for the block-decay order book with terminal target
/// base + slope W3_T: the deterministic profile aimed at the expected target
/// plus the left-point stochastic integral
/// int_0^s (1 + (s-r) rho) / (2 + (T-r) rho) dE_r[xi].
/// Runs in O(n) by splitting the kernel into two running sums.
#[allow(clippy::too_many_arguments)]
pub fn ow_strategy_random_target(
    x: f64,
    d: f64,
    gamma0: f64,
    rho: f64,
    base: f64,
    slope: f64,
    grid: &TimeGrid,
    dw3: &[f64],
) -> StrategyPath {
    let n = grid.n_steps();
    debug_assert_eq!(dw3.len(), n);
    let t0 = grid.t0();
    let horizon = grid.horizon();
    let t_end = t0 + horizon;
    // Kernel split: 1 + (s_i - s_k) rho = (1 + (s_i - t0) rho) - (s_k - t0) rho.
    let mut plain = 0.0; // sum of dE_k / (2 + (T - s_k) rho) over k < i
    let mut weighted = 0.0; // same sum weighted by (s_k - t0)
    let mut values = Vec::with_capacity(n);
    let mut w3 = 0.0;
    for i in 0..n {
        let s = grid.node(i);
        let det = (x - base - d / gamma0) * (1.0 + (t_end - s) * rho) / (2.0 + horizon * rho);
        values.push(det + base + (1.0 + (s - t0) * rho) * plain - rho * weighted);
        let denom = 2.0 + (t_end - s) * rho;
        let de = slope * dw3[i];
        plain += de / denom;
        weighted += (s - t0) * de / denom;
        w3 += dw3[i];
    }
    StrategyPath::pm(x, values, base + slope * w3)
}

/// K of the rough-drift family,
/// e^{int_s^T mu} / (int_s^T 2 (rho+mu)^2 / (2 rho+mu) e^{int_r^T mu} dr + 2),
/// by trapezoid at the same half-step resolution the Riccati solver taps.
pub fn rough_drift_k(mu: &Coefficient, rho: f64, grid: &TimeGrid) -> Vec<f64> {
    let n = grid.n_steps();
    let fine_n = 2 * QUAD_REFINE * n;
    let h = grid.horizon() / fine_n as f64;
    let mu_tab: Vec<f64> = (0..=fine_n)
        .map(|j| mu.at(grid.t0() + h * j as f64))
        .collect();
    // suffix_mu[j] = int_{s_j}^T mu
    let mut suffix_mu = vec![0.0; fine_n + 1];
    for j in (0..fine_n).rev() {
        suffix_mu[j] = suffix_mu[j + 1] + 0.5 * h * (mu_tab[j] + mu_tab[j + 1]);
    }
    let weight = |j: usize| {
        let m = mu_tab[j];
        2.0 * (rho + m) * (rho + m) / (2.0 * rho + m) * suffix_mu[j].exp()
    };
    let mut suffix_int = vec![0.0; fine_n + 1];
    for j in (0..fine_n).rev() {
        suffix_int[j] = suffix_int[j + 1] + 0.5 * h * (weight(j) + weight(j + 1));
    }
    (0..=n)
        .map(|i| {
            let j = 2 * QUAD_REFINE * i;
            suffix_mu[j].exp() / (suffix_int[j] + 2.0)
        })
        .collect()
}

/// Feedback gain of the rough-drift family: theta = 2 (rho+mu) K / (2 rho+mu).
pub fn rough_drift_theta(mu: &Coefficient, rho: f64, grid: &TimeGrid, k: &[f64]) -> Vec<f64> {
    (0..=grid.n_steps())
        .map(|i| {
            let m = mu.at(grid.node(i));
            2.0 * (rho + m) * k[i] / (2.0 * rho + m)
        })
        .collect()
}

/// Optimal state of the rough-drift family by left-point sums:
/// H*_s = h0 exp(int_0^s mu/2 - (rho+mu) theta).
pub fn rough_drift_state(
    mu: &Coefficient,
    rho: f64,
    grid: &TimeGrid,
    theta: &[f64],
    h0: f64,
) -> Vec<f64> {
    let n = grid.n_steps();
    let dt = grid.dt();
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(n + 1);
    values.push(h0);
    for i in 0..n {
        let m = mu.at(grid.node(i));
        acc += (0.5 * m - (rho + m) * theta[i]) * dt;
        values.push(h0 * acc.exp());
    }
    values
}

fn q_of(sigma: f64, eta: f64, rbar: f64) -> f64 {
    sigma * sigma + 2.0 * sigma * eta * rbar + eta * eta
}

fn kappa_of(rho: f64, sigma: f64, eta: f64, rbar: f64) -> f64 {
    0.5 * (2.0 * rho - sigma * sigma - eta * eta - 2.0 * sigma * eta * rbar)
}

/// K of the diffusive-resilience family,
/// (kappa/q) / W((kappa/q) exp(c - rho^2 (s-t0)/q)),
/// c = ln 2 + (2 kappa + rho^2 T)/q. Requires kappa > 0 and q > 0.
#[allow(clippy::too_many_arguments)]
pub fn diffusive_resilience_k(
    sigma: f64,
    eta: f64,
    rho: f64,
    rbar: f64,
    t0: f64,
    horizon: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    let q = q_of(sigma, eta, rbar);
    let kappa = kappa_of(rho, sigma, eta, rbar);
    if q <= 0.0 || kappa <= 0.0 {
        return Err(Error::domain(format!(
            "the diffusive-resilience family needs q > 0 and kappa > 0, got q = {q}, kappa = {kappa}"
        )));
    }
    let c = 2.0f64.ln() + (2.0 * kappa + rho * rho * horizon) / q;
    times
        .iter()
        .map(|&s| {
            let arg = kappa / q * (c - rho * rho * (s - t0) / q).exp();
            Ok(kappa / q / lambert_w0(arg)?)
        })
        .collect()
}

/// Feedback gain of the diffusive-resilience family: rho K / (q K + kappa).
pub fn diffusive_resilience_theta(
    sigma: f64,
    eta: f64,
    rho: f64,
    rbar: f64,
    k: &[f64],
) -> Vec<f64> {
    let q = q_of(sigma, eta, rbar);
    let kappa = kappa_of(rho, sigma, eta, rbar);
    k.iter().map(|&ki| rho * ki / (q * ki + kappa)).collect()
}

/// Optimal strategy of the diffusive-resilience family on one noise path:
/// X*_s = (x - d/gamma0) (1 - theta_s)
///        exp(-(rho - sigma^2 - sigma eta rbar) int theta - q/2 int theta^2)
///        exp(-(sigma + eta rbar) int theta dW1 - eta sqrt(1-rbar^2) int theta dW2),
/// with all integrals as left-point sums on the grid.
#[allow(clippy::too_many_arguments)]
pub fn diffusive_resilience_strategy(
    x: f64,
    d: f64,
    gamma0: f64,
    sigma: f64,
    eta: f64,
    rho: f64,
    rbar: f64,
    grid: &TimeGrid,
    theta: &[f64],
    dw1: &[f64],
    dw2: &[f64],
) -> StrategyPath {
    let n = grid.n_steps();
    let dt = grid.dt();
    let q = q_of(sigma, eta, rbar);
    let sig_eff = sigma + eta * rbar;
    let eta_perp = eta * (1.0 - rbar * rbar).max(0.0).sqrt();
    let lead = x - d / gamma0;
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            let th = theta[i - 1];
            acc += (-(rho - sigma * sigma - sigma * eta * rbar) * th - 0.5 * q * th * th) * dt
                - sig_eff * th * dw1[i - 1]
                - eta_perp * th * dw2[i - 1];
        }
        values.push(lead * (1.0 - theta[i]) * acc.exp());
    }
    StrategyPath::pm(x, values, 0.0)
}

/// Deterministic optimal strategy of the noise-cancellation family:
/// the block-decay profile (x - d/gamma0) (1 + (T-s) rho) / (2 + T rho).
pub fn noise_cancellation_strategy(
    x: f64,
    d: f64,
    gamma0: f64,
    rho: f64,
    t0: f64,
    horizon: f64,
    times: &[f64],
) -> Vec<f64> {
    ow_strategy_deterministic(x, 0.0, d, gamma0, rho, t0, horizon, times)
}

/// Deviation of the noise-cancellation optimal strategy on one noise path:
/// gamma0 (x - d/gamma0) (1+T rho)/(2+T rho) exp(int eta dW1 - 1/2 int eta^2),
/// by left-point sums. eta is passed at the nodes.
#[allow(clippy::too_many_arguments)]
pub fn noise_cancellation_deviation(
    x: f64,
    d: f64,
    gamma0: f64,
    rho: f64,
    grid: &TimeGrid,
    eta: &[f64],
    dw1: &[f64],
) -> Vec<f64> {
    let n = grid.n_steps();
    let dt = grid.dt();
    let horizon = grid.horizon();
    let lead = gamma0 * (x - d / gamma0) * (1.0 + horizon * rho) / (2.0 + horizon * rho);
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(n + 1);
    values.push(lead);
    for i in 0..n {
        acc += eta[i] * dw1[i] - 0.5 * eta[i] * eta[i] * dt;
        values.push(lead * acc.exp());
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::Simulator;
    use crate::solver;
    use crate::stats::total_variation;

    fn nodes(n: usize) -> Vec<f64> {
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn tanh_form_tends_to_the_reciprocal_form() {
        let ts = nodes(64);
        let small = ow_k(1.0, 1e-8, 0.0, 1.0, &ts);
        let zero = ow_k(1.0, 0.0, 0.0, 1.0, &ts);
        for i in 0..=64 {
            assert!(
                (small[i] - zero[i]).abs() < 1e-6,
                "node {i}: {} vs {}",
                small[i],
                zero[i]
            );
        }
    }

    #[test]
    fn riccati_solver_reproduces_the_tanh_form() {
        let cfg = ExampleConfig::new(ExampleKind::OwDeterministic, 1000);
        let mut spec = cfg.model_spec().unwrap();
        spec.lambda = Coefficient::constant(1.0);
        let sol = solver::solve_k(&spec).unwrap();
        let exact = ow_k(1.0, 1.0, 0.0, 1.0, &spec.grid.nodes());
        for i in (0..=1000).step_by(40) {
            assert!(
                (sol.k()[i] - exact[i]).abs() < 1e-8,
                "node {i}: {} vs {}",
                sol.k()[i],
                exact[i]
            );
        }
    }

    #[test]
    fn gamma_quadrature_meets_its_closed_form_budget() {
        let ts = nodes(500);
        let got = ow_gamma(1.0, 0.0, 0.0, 1.0, &ts);
        for (i, &s) in ts.iter().enumerate() {
            let exact = (2.0 + (1.0 - s)) / 3.0;
            assert!((got[i] - exact).abs() < 1e-8, "node {i}");
        }
    }

    #[test]
    fn psi_quadrature_matches_the_solver() {
        let grid = TimeGrid::new(0.0, 1.0, 800).unwrap();
        let zeta = Coefficient::constant(0.3);
        let mut spec = ModelSpec::with_constants(
            grid,
            1.5,
            0.0,
            0.0,
            1.0,
            0.0,
            0.0,
            0.8,
            TargetSpec {
                terminal: TerminalTarget::Const(0.6),
                running: RunningTarget::Deterministic(zeta.clone()),
            },
            1.0,
            0.0,
        )
        .unwrap();
        spec.lambda = Coefficient::constant(0.8);
        let coeffs = spec.sample();
        let ric = solver::solve_k(&spec).unwrap();
        let psi = solver::solve_psi(&spec, &coeffs, &ric).unwrap();
        let oracle = ow_psi_deterministic(1.0, 0.8, 1.5, 0.6, &zeta, 0.0, 1.0, &grid.nodes());
        for i in (0..=800).step_by(50) {
            let got = psi.value(i, 0.6);
            assert!(
                (got - oracle[i]).abs() < 1e-7,
                "node {i}: {got} vs {}",
                oracle[i]
            );
        }
    }

    #[test]
    fn random_target_representation_matches_the_feedback_solver() {
        let cfg = ExampleConfig::new(ExampleKind::OwRandomTarget, 2000);
        let spec = cfg.model_spec().unwrap();
        let law = solver::solve(&spec).unwrap();
        let sim = Simulator::new(spec.clone(), 31).unwrap();
        for p in 0..3 {
            let b = sim.bundle(p);
            let fast = ow_strategy_random_target(1.0, 0.2, 1.0, 1.0, 0.0, 0.5, &spec.grid, &b.dw3);
            let solved = law.strategy_path(&b);
            let mut sq = 0.0;
            for i in 0..2000 {
                sq += (fast.values[i] - solved.values[i]).powi(2);
            }
            let rms = (sq / 2000.0).sqrt();
            assert!(rms < 5e-3, "path {p}: rms {rms}");
            assert_eq!(fast.xi, solved.xi);
        }
    }

    #[test]
    fn rough_drift_k_reduces_to_the_block_decay_form_for_flat_drift() {
        let grid = TimeGrid::new(0.0, 1.0, 500).unwrap();
        let k = rough_drift_k(&Coefficient::constant(0.0), 1.0, &grid);
        for i in (0..=500).step_by(25) {
            let s = i as f64 / 500.0;
            let exact = 1.0 / (2.0 + (1.0 - s));
            assert!((k[i] - exact).abs() < 1e-9, "node {i}");
        }
    }

    #[test]
    fn rough_drift_k_cross_checks_the_riccati_solver() {
        let cfg = ExampleConfig::new(ExampleKind::RoughDrift, 1000);
        let spec = cfg.model_spec().unwrap();
        let sol = solver::solve_k(&spec).unwrap();
        let oracle = rough_drift_k(&spec.mu, 1.0, &spec.grid);
        let mut worst = 0.0f64;
        for (k, o) in sol.k().iter().zip(&oracle) {
            worst = worst.max((k - o).abs());
        }
        assert!(worst < 1e-5, "worst gap {worst}");
    }

    #[test]
    fn rough_drift_strategy_tracks_the_solver() {
        let cfg = ExampleConfig::new(ExampleKind::RoughDrift, 1000);
        let spec = cfg.model_spec().unwrap();
        let law = solver::solve(&spec).unwrap();
        let sim = Simulator::new(spec.clone(), 3).unwrap();
        let b = sim.bundle(0);
        let k = rough_drift_k(&spec.mu, 1.0, &spec.grid);
        let theta = rough_drift_theta(&spec.mu, 1.0, &spec.grid, &k);
        let state = rough_drift_state(&spec.mu, 1.0, &spec.grid, &theta, spec.h0());
        let solved = law.strategy_path(&b);
        for i in (0..1000).step_by(100) {
            // gamma is deterministic here (sigma = 0), inv sqrt from the bundle.
            let x_oracle = (-0.5 * b.log_gamma[i]).exp() * (theta[i] - 1.0) * state[i];
            assert!(
                (solved.values[i] - x_oracle).abs() < 1e-4,
                "node {i}: {} vs {x_oracle}",
                solved.values[i]
            );
        }
    }

    #[test]
    fn rough_gain_accumulates_variation_under_refinement_smooth_does_not() {
        let tv_of = |mu: &Coefficient, n: usize| {
            let grid = TimeGrid::new(0.0, 1.0, n).unwrap();
            let k = rough_drift_k(mu, 1.0, &grid);
            total_variation(&rough_drift_theta(mu, 1.0, &grid, &k))
        };
        let rough = rough_drift_mu(0.0, 1.0);
        let tv_rough_coarse = tv_of(&rough, 500);
        let tv_rough_fine = tv_of(&rough, 2000);
        assert!(
            tv_rough_fine > 1.5 * tv_rough_coarse,
            "rough: {tv_rough_coarse} -> {tv_rough_fine}"
        );
        let smooth = Coefficient::time_fn(|s| 0.3 * (2.0 * std::f64::consts::PI * s).sin());
        let tv_smooth_coarse = tv_of(&smooth, 500);
        let tv_smooth_fine = tv_of(&smooth, 2000);
        assert!(
            (tv_smooth_fine - tv_smooth_coarse).abs() < 0.05 * tv_smooth_coarse,
            "smooth: {tv_smooth_coarse} -> {tv_smooth_fine}"
        );
    }

    #[test]
    fn lambert_form_hits_the_terminal_condition_exactly() {
        let ts = nodes(200);
        let k = diffusive_resilience_k(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, &ts).unwrap();
        assert!((k[200] - 0.5).abs() < 1e-12);
        for i in 0..200 {
            assert!(k[i] > 0.0 && k[i] <= 0.5);
            assert!(k[i] < k[i + 1], "K must increase");
        }
        let theta = diffusive_resilience_theta(0.0, 1.0, 1.0, 0.0, &k);
        for i in 0..200 {
            assert!(theta[i] > 0.0 && theta[i] <= 0.5);
            assert!(theta[i] < theta[i + 1], "theta must increase");
        }
    }

    #[test]
    fn lambert_form_cross_checks_the_riccati_solver() {
        let cfg = ExampleConfig::new(ExampleKind::DiffusiveResilience, 1000);
        let spec = cfg.model_spec().unwrap();
        let sol = solver::solve_k(&spec).unwrap();
        let oracle =
            diffusive_resilience_k(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, &spec.grid.nodes()).unwrap();
        for i in (0..=1000).step_by(40) {
            assert!(
                (sol.k()[i] - oracle[i]).abs() < 1e-6,
                "node {i}: {} vs {}",
                sol.k()[i],
                oracle[i]
            );
        }
    }

    #[test]
    fn lambert_k_satisfies_the_ode_at_second_order() {
        // Centered finite differences of the closed form plugged into the
        // backward ODE; the residual must shrink at order >= 1.9.
        let residual = |n: usize| -> f64 {
            let ts = nodes(n);
            let h = 1.0 / n as f64;
            let k = diffusive_resilience_k(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, &ts).unwrap();
            let c = solver::RhsCoeffs {
                mu: 0.0,
                rho: 1.0,
                sigma: 0.0,
                eta: 1.0,
                rbar: 0.0,
                lambda: 0.0,
            };
            let mut worst = 0.0f64;
            for i in 1..n {
                let deriv = (k[i + 1] - k[i - 1]) / (2.0 * h);
                let rhs = solver::riccati_rhs(&c, k[i]).unwrap();
                worst = worst.max((deriv - rhs).abs());
            }
            worst
        };
        let r1 = residual(200);
        let r2 = residual(800);
        let order = (r1 / r2).ln() / 4.0f64.ln();
        assert!(order > 1.9, "observed order {order} ({r1} -> {r2})");
    }

    #[test]
    fn cancellation_family_strategy_is_the_block_decay_profile() {
        let cfg = ExampleConfig::new(ExampleKind::NoiseCancellation, 400);
        let spec = cfg.model_spec().unwrap();
        let sol = solver::solve_k(&spec).unwrap();
        let ts = spec.grid.nodes();
        for i in (0..=400).step_by(50) {
            let exact = 1.0 / (2.0 + (1.0 - ts[i]));
            assert!((sol.k()[i] - exact).abs() < 1e-8);
        }
        let profile = noise_cancellation_strategy(1.0, 0.2, 1.0, 1.0, 0.0, 1.0, &ts);
        // (x - d/gamma0)(1 + (T-s) rho)/(2 + T rho), decreasing toward 0.
        assert!((profile[0] - 0.8 * 2.0 / 3.0).abs() < 1e-14);
        assert!((profile[400] - 0.8 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn example_names_round_trip() {
        for kind in ExampleKind::all() {
            assert_eq!(ExampleKind::from_name(kind.name()).unwrap(), kind);
            assert!(ExampleConfig::new(kind, 64).model_spec().is_ok());
        }
        assert!(ExampleKind::from_name("nope").is_err());
    }
}
