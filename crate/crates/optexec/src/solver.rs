//! Optimal execution in the deterministic-coefficient regime.
//!
//! The value function of the LQ problem is quadratic with coefficient K
//! solving a backward Riccati ODE; dK/ds = -F(s, K) with
//!
//!   F = (mu + r (r q - 2 (rho + mu))) K + kappa r
//!       - ((rho + mu - r q) K)^2 / (lambda + kappa + q K),
//!
//! r = lambda / (lambda + kappa), q = sigma^2 + 2 sigma eta rbar + eta^2, and
//! terminal value K_T = 1/2. The solution stays in (0, 1/2] and keeps the
//! denominator positive; both are enforced. Integration is classical RK4,
//! backward on a grid refined 10x from the simulation grid, then downsampled.
//!
//! The inhomogeneous (target-tracking) part is carried by psi, solved here in
//! the subfamily mu = sigma = eta = 0 with constant rho > 0 and constant
//! lambda >= 0:
//!
//!   psi_s = Gamma_s^{-1} sqrt(gamma0) (-1/2 Gamma_T E_s[xi]
//!           - (rho lambda / (lambda + rho)) int_s^T Gamma_r (1 - K_r) E_s[zeta_r] dr),
//!
//! Gamma_s = exp(-rho int_0^s (lambda/(lambda+rho) + theta_r) dr). Gamma is
//! quadrature-defined (trapezoid on the refined grid); the lambda = 0 case has
//! the explicit form (2 + (T-s) rho) / (2 + T rho) used as its error budget.
//! Outside the subfamily psi is identically zero when xi = 0 and lambda zeta
//! vanishes, and unsupported otherwise.
//!
//! Feedback gains: theta = (rho + mu - r q) K / (lambda + kappa + q K) and
//! theta0 = (alpha psi + r sqrt(gamma) zeta q K) / (lambda + kappa + q K),
//! alpha = rho + mu - (sigma^2 + sigma eta rbar)/2. The denominator is
//! evaluated once per node and shared. The optimal state solves
//! dH* = H* dY + dZ with
//!
//!   dY = (mu/2 - sigma^2/8 - alpha (r + theta)) ds
//!      + (sigma/2 - (sigma + eta rbar)(r + theta)) dW1
//!      - eta sqrt(1-rbar^2) (r + theta) dW2,
//!   dZ = (alpha ds + (sigma + eta rbar) dW1 + eta sqrt(1-rbar^2) dW2)
//!      * (theta0 - sqrt(gamma) zeta r),
//!
//! integrated by left-point Euler when Z is live. When Z vanishes
//! identically, H* is a geometric process and the exact stochastic
//! exponential of the discrete increments is used instead; its W1 exposure
//! then cancels against gamma^{-1/2} in the strategy formula to rounding
//! level, which keeps deterministic optimal strategies (eta = sigma, rbar =
//! -1) deterministic across paths instead of leaking O(dt) noise.

use crate::cost::{kappa_path, CostEstimate, KappaPath};
use crate::error::{Error, Result};
use crate::lq::ControlPath;
use crate::mc;
use crate::model::{ModelSpec, RunningTarget, SampledCoeffs, TerminalTarget};
use crate::path::{PathBundle, Simulator};
use crate::stats::mean_se;
use crate::strategy::{DeviationPath, StrategyKind, StrategyPath, StrategySource};

const REFINE: usize = 10;

/// Riccati coefficients at one time point.
#[derive(Debug, Clone, Copy)]
pub struct RhsCoeffs {
    pub mu: f64,
    pub rho: f64,
    pub sigma: f64,
    pub eta: f64,
    pub rbar: f64,
    pub lambda: f64,
}

impl RhsCoeffs {
    fn kappa(&self) -> f64 {
        0.5 * (2.0 * self.rho + self.mu
            - self.sigma * self.sigma
            - self.eta * self.eta
            - 2.0 * self.sigma * self.eta * self.rbar)
    }

    fn quad(&self) -> f64 {
        self.sigma * self.sigma + 2.0 * self.sigma * self.eta * self.rbar + self.eta * self.eta
    }

    fn ratio(&self) -> Result<f64> {
        let denom = self.lambda + self.kappa();
        if denom == 0.0 {
            if self.lambda == 0.0 {
                Ok(0.0)
            } else {
                Err(Error::domain(
                    "lambda + kappa vanishes with lambda > 0; cross-term ratio undefined",
                ))
            }
        } else {
            Ok(self.lambda / denom)
        }
    }
}

/// Backward ODE right-hand side dK/ds at the given coefficients.
pub fn riccati_rhs(c: &RhsCoeffs, k: f64) -> Result<f64> {
    let kappa = c.kappa();
    let q = c.quad();
    let r = c.ratio()?;
    let denom = c.lambda + kappa + q * k;
    if denom <= 0.0 {
        return Err(Error::domain(format!(
            "Riccati denominator {denom} not positive at K = {k}"
        )));
    }
    let a = c.mu + r * (r * q - 2.0 * (c.rho + c.mu));
    let g = (c.rho + c.mu - r * q) * k;
    Ok(-(a * k + kappa * r - g * g / denom))
}

#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    k: Vec<f64>,
    theta: Vec<f64>,
    denom: Vec<f64>,
    k_refined: Vec<f64>,
    refine: usize,
}

impl RiccatiSolution {
    /// K at the simulation grid nodes; last entry exactly 1/2.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Feedback gain theta at the nodes.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Shared denominator lambda + kappa + q K at the nodes.
    pub fn denom(&self) -> &[f64] {
        &self.denom
    }

    pub(crate) fn k_refined(&self) -> &[f64] {
        &self.k_refined
    }

    pub(crate) fn refine(&self) -> usize {
        self.refine
    }
}

/// Solves the backward Riccati ODE. Requires deterministic coefficients with
/// kappa >= 0 on the grid and the uniform positivity of either lambda + kappa
/// or the noise load q.
pub fn solve_k(spec: &ModelSpec) -> Result<RiccatiSolution> {
    let n = spec.grid.n_steps();
    let big_n = REFINE * n;
    let h = spec.grid.dt() / REFINE as f64;
    let t0 = spec.grid.t0();

    // Coefficients tabulated at half-steps of the refined grid: index j is
    // time t0 + j h / 2, j = 0..=2N.
    let mut tab = Vec::with_capacity(2 * big_n + 1);
    for j in 0..=(2 * big_n) {
        let s = t0 + 0.5 * h * j as f64;
        tab.push(RhsCoeffs {
            mu: spec.mu.at(s),
            rho: spec.rho.at(s),
            sigma: spec.sigma.at(s),
            eta: spec.eta.at(s),
            rbar: spec.rbar.at(s),
            lambda: spec.lambda.at(s),
        });
    }
    let mut min_e0 = f64::INFINITY;
    let mut min_q = f64::INFINITY;
    for (j, c) in tab.iter().enumerate() {
        let kappa = c.kappa();
        if kappa < -1e-12 {
            return Err(Error::domain(format!(
                "kappa = {kappa} < 0 at s = {}; the solver needs 2 rho + mu >= sigma^2 + eta^2 + 2 sigma eta rbar",
                t0 + 0.5 * h * j as f64
            )));
        }
        c.ratio()?;
        min_e0 = min_e0.min(c.lambda + kappa);
        min_q = min_q.min(c.quad());
    }
    if min_e0 < 1e-10 && min_q < 1e-10 {
        return Err(Error::domain(
            "neither lambda + kappa nor the noise load is uniformly positive",
        ));
    }

    let stage = |idx: usize, k: f64| -> Result<f64> {
        riccati_rhs(&tab[idx], k).map_err(|e| match e {
            Error::Domain(msg) => Error::solver(t0 + 0.5 * h * idx as f64, msg),
            other => other,
        })
    };

    let mut k_refined = vec![0.0; big_n + 1];
    k_refined[big_n] = 0.5;
    for j in (1..=big_n).rev() {
        let kj = k_refined[j];
        let k1 = stage(2 * j, kj)?;
        let k2 = stage(2 * j - 1, kj - 0.5 * h * k1)?;
        let k3 = stage(2 * j - 1, kj - 0.5 * h * k2)?;
        let k4 = stage(2 * j - 2, kj - h * k3)?;
        let mut next = kj - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if next > 0.5 {
            if next < 0.5 + 1e-9 {
                next = 0.5;
            } else {
                return Err(Error::solver(
                    t0 + (j - 1) as f64 * h,
                    format!("K = {next} escaped its upper bound 1/2"),
                ));
            }
        }
        if next <= 0.0 {
            return Err(Error::solver(
                t0 + (j - 1) as f64 * h,
                format!("K = {next} lost positivity"),
            ));
        }
        k_refined[j - 1] = next;
    }

    let coeffs = spec.sample();
    let kap = kappa_path(&coeffs)?;
    let mut k = Vec::with_capacity(n + 1);
    let mut theta = Vec::with_capacity(n + 1);
    let mut denom = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let ki = k_refined[REFINE * i];
        let den = coeffs.lambda[i] + kap.kappa[i] + coeffs.quad[i] * ki;
        if den <= 0.0 {
            return Err(Error::solver(
                coeffs.t0 + coeffs.dt * i as f64,
                format!("feedback denominator {den} not positive"),
            ));
        }
        let g = coeffs.rho[i] + coeffs.mu[i] - kap.ratio[i] * coeffs.quad[i];
        k.push(ki);
        theta.push(g * ki / den);
        denom.push(den);
    }
    Ok(RiccatiSolution {
        k,
        theta,
        denom,
        k_refined,
        refine: REFINE,
    })
}

/// Inhomogeneous value coefficient: psi_s = slope_s E_s[xi] + offset_s at the
/// grid nodes. For constant terminal targets the forecast is the constant.
#[derive(Debug, Clone)]
pub struct PsiSolution {
    slope: Vec<f64>,
    offset: Vec<f64>,
}

impl PsiSolution {
    pub fn zero(n: usize) -> Self {
        PsiSolution {
            slope: vec![0.0; n + 1],
            offset: vec![0.0; n + 1],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.slope.iter().all(|&v| v == 0.0) && self.offset.iter().all(|&v| v == 0.0)
    }

    /// psi at node i given the conditional target expectation there.
    pub fn value(&self, i: usize, forecast: f64) -> f64 {
        self.slope[i] * forecast + self.offset[i]
    }

    pub fn len(&self) -> usize {
        self.slope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slope.is_empty()
    }
}

fn const_coeff(c: &crate::coeff::Coefficient) -> Option<f64> {
    c.as_constant()
}

/// True when lambda_i zeta_i = 0 at every node for every path.
fn lambda_zeta_vanishes(spec: &ModelSpec, coeffs: &SampledCoeffs) -> bool {
    match &coeffs.zeta {
        Some(z) => z
            .iter()
            .zip(&coeffs.lambda)
            .all(|(&zi, &li)| li * zi == 0.0),
        // Running target tracks E_s[xi]; it vanishes only when xi does.
        None => matches!(spec.targets.terminal, TerminalTarget::Const(c) if c == 0.0),
    }
}

/// Solves for psi. Supported: the subfamily mu = sigma = eta = 0 with
/// constant rho > 0 and constant lambda >= 0 (any configured target), and the
/// trivial case xi = 0 with lambda zeta = 0 where psi vanishes identically.
pub fn solve_psi(
    spec: &ModelSpec,
    coeffs: &SampledCoeffs,
    ric: &RiccatiSolution,
) -> Result<PsiSolution> {
    let n = coeffs.n;
    let subfamily = const_coeff(&spec.mu) == Some(0.0)
        && const_coeff(&spec.sigma) == Some(0.0)
        && const_coeff(&spec.eta) == Some(0.0)
        && matches!(const_coeff(&spec.rho), Some(r) if r > 0.0)
        && matches!(const_coeff(&spec.lambda), Some(l) if l >= 0.0);

    if !subfamily {
        let xi_zero = matches!(spec.targets.terminal, TerminalTarget::Const(c) if c == 0.0);
        if xi_zero && lambda_zeta_vanishes(spec, coeffs) {
            return Ok(PsiSolution::zero(n));
        }
        return Err(Error::unsupported(
            "target tracking (xi != 0 or lambda zeta != 0) is only solvable with mu = sigma = eta = 0 and constant rho > 0, lambda >= 0",
        ));
    }

    let rho = const_coeff(&spec.rho).unwrap();
    let lambda = const_coeff(&spec.lambda).unwrap();
    let lr = lambda / (lambda + rho);
    let sqrt_g0 = spec.gamma0.sqrt();
    let refine = ric.refine();
    let kr = ric.k_refined();
    let big_n = refine * n;
    let h = coeffs.dt / refine as f64;

    // Gamma by trapezoidal quadrature of lambda/(lambda+rho) + theta, with
    // theta = rho K / (lambda + rho) in this subfamily.
    let theta_at = |j: usize| rho * kr[j] / (lambda + rho);
    let mut gamma_big = Vec::with_capacity(big_n + 1);
    let mut cum = 0.0;
    gamma_big.push(1.0f64);
    for j in 0..big_n {
        cum += 0.5 * h * (lr + theta_at(j) + lr + theta_at(j + 1));
        gamma_big.push((-rho * cum).exp());
    }
    let gamma_t = gamma_big[big_n];

    // Suffix integrals int_s^T Gamma (1 - K) w dr, for w = 1 (forecast-slope
    // part when zeta tracks E_s[xi]) and w = zeta_r (deterministic part).
    let needs_slope_integral = matches!(spec.targets.running, RunningTarget::ExpectedTerminal);
    let zeta_at: Box<dyn Fn(f64) -> f64> = match &spec.targets.running {
        RunningTarget::Zero => Box::new(|_| 0.0),
        RunningTarget::Deterministic(c) => {
            let c = c.clone();
            Box::new(move |s| c.at(s))
        }
        RunningTarget::ExpectedTerminal => Box::new(|_| 0.0),
    };

    let integrand_one = |j: usize| gamma_big[j] * (1.0 - kr[j]);
    let integrand_zeta =
        |j: usize| gamma_big[j] * (1.0 - kr[j]) * zeta_at(coeffs.t0 + h * j as f64);
    let mut suffix_one = vec![0.0; big_n + 1];
    let mut suffix_zeta = vec![0.0; big_n + 1];
    if lambda > 0.0 {
        for j in (0..big_n).rev() {
            if needs_slope_integral {
                suffix_one[j] =
                    suffix_one[j + 1] + 0.5 * h * (integrand_one(j) + integrand_one(j + 1));
            } else {
                suffix_zeta[j] =
                    suffix_zeta[j + 1] + 0.5 * h * (integrand_zeta(j) + integrand_zeta(j + 1));
            }
        }
    }

    let mut slope = Vec::with_capacity(n + 1);
    let mut offset = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let j = refine * i;
        let inv_gamma = 1.0 / gamma_big[j];
        let mut sl = -0.5 * inv_gamma * sqrt_g0 * gamma_t;
        let mut of = 0.0;
        if lambda > 0.0 {
            if needs_slope_integral {
                sl -= inv_gamma * sqrt_g0 * rho * lr * suffix_one[j];
            } else {
                of = -inv_gamma * sqrt_g0 * rho * lr * suffix_zeta[j];
            }
        }
        slope.push(sl);
        offset.push(of);
    }
    Ok(PsiSolution { slope, offset })
}

/// Conditional expectation of the terminal target at each node for one path.
fn forecast_at(spec: &ModelSpec, bundle: &PathBundle, i: usize) -> f64 {
    match spec.targets.terminal {
        TerminalTarget::Const(c) => c,
        TerminalTarget::LinearInDriver { .. } => bundle
            .target_forecast
            .as_ref()
            .expect("random target needs its forecast path")[i],
    }
}

/// theta0 at the nodes for one path:
/// (alpha psi + r sqrt(gamma) zeta q K) / (lambda + kappa + q K).
pub fn theta0_nodes(
    spec: &ModelSpec,
    coeffs: &SampledCoeffs,
    kap: &KappaPath,
    ric: &RiccatiSolution,
    psi: &PsiSolution,
    bundle: &PathBundle,
) -> Vec<f64> {
    let zeta = coeffs.zeta_nodes(bundle);
    (0..=coeffs.n)
        .map(|i| {
            let p = psi.value(i, forecast_at(spec, bundle, i));
            (coeffs.alpha[i] * p
                + kap.ratio[i] * bundle.sqrt_gamma[i] * zeta[i] * coeffs.quad[i] * ric.k()[i])
                / ric.denom()[i]
        })
        .collect()
}

/// The solved optimal control law: Riccati solution, psi, and the per-path
/// realizations of the optimal state, control, strategy, and deviation.
pub struct OptimalLaw {
    spec: ModelSpec,
    coeffs: SampledCoeffs,
    kap: KappaPath,
    riccati: RiccatiSolution,
    psi: PsiSolution,
    /// True when the inhomogeneous part of the state SDE vanishes for every
    /// path, enabling the exact stochastic-exponential integrator.
    z_vanishes: bool,
}

pub fn solve(spec: &ModelSpec) -> Result<OptimalLaw> {
    spec.validate()?;
    let coeffs = spec.sample();
    let kap = kappa_path(&coeffs)?;
    let riccati = solve_k(spec)?;
    let psi = solve_psi(spec, &coeffs, &riccati)?;
    let rz_zero = match &coeffs.zeta {
        Some(z) => z.iter().zip(&kap.ratio).all(|(&zi, &ri)| ri * zi == 0.0),
        None => matches!(spec.targets.terminal, TerminalTarget::Const(c) if c == 0.0),
    };
    let z_vanishes = psi.is_zero() && rz_zero;
    Ok(OptimalLaw {
        spec: spec.clone(),
        coeffs,
        kap,
        riccati,
        psi,
        z_vanishes,
    })
}

impl OptimalLaw {
    pub fn riccati(&self) -> &RiccatiSolution {
        &self.riccati
    }

    pub fn psi(&self) -> &PsiSolution {
        &self.psi
    }

    pub fn kappa(&self) -> &KappaPath {
        &self.kap
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Optimal state path for one bundle.
    pub fn state_nodes(&self, bundle: &PathBundle) -> Vec<f64> {
        let c = &self.coeffs;
        let n = c.n;
        let dt = c.dt;
        let theta = self.riccati.theta();
        let h0 = self.spec.h0();
        let mut values = Vec::with_capacity(n + 1);
        if self.z_vanishes {
            // Geometric case: exact exponential of the discrete increments.
            let mut acc = 0.0;
            values.push(h0);
            for i in 0..n {
                let rt = self.kap.ratio[i] + theta[i];
                let a = 0.5 * c.mu[i] - 0.125 * c.sigma[i] * c.sigma[i] - c.alpha[i] * rt;
                let c1 = 0.5 * c.sigma[i] - c.sig_eff[i] * rt;
                let c2 = -c.eta_perp[i] * rt;
                acc +=
                    (a - 0.5 * (c1 * c1 + c2 * c2)) * dt + c1 * bundle.dw1[i] + c2 * bundle.dw2[i];
                values.push(h0 * acc.exp());
            }
        } else {
            let theta0 = theta0_nodes(&self.spec, c, &self.kap, &self.riccati, &self.psi, bundle);
            let zeta = c.zeta_nodes(bundle);
            let mut h = h0;
            values.push(h);
            for i in 0..n {
                let rt = self.kap.ratio[i] + theta[i];
                let a = 0.5 * c.mu[i] - 0.125 * c.sigma[i] * c.sigma[i] - c.alpha[i] * rt;
                let c1 = 0.5 * c.sigma[i] - c.sig_eff[i] * rt;
                let c2 = -c.eta_perp[i] * rt;
                let inhom = theta0[i] - bundle.sqrt_gamma[i] * zeta[i] * self.kap.ratio[i];
                h += h * (a * dt + c1 * bundle.dw1[i] + c2 * bundle.dw2[i])
                    + inhom
                        * (c.alpha[i] * dt
                            + c.sig_eff[i] * bundle.dw1[i]
                            + c.eta_perp[i] * bundle.dw2[i]);
                values.push(h);
            }
        }
        values
    }

    /// Optimal strategy for one bundle:
    /// X* = gamma^{-1/2} ((theta + r - 1) H* - theta0) + r zeta on [t0, T).
    pub fn strategy_path(&self, bundle: &PathBundle) -> StrategyPath {
        let c = &self.coeffs;
        let n = c.n;
        let state = self.state_nodes(bundle);
        let theta = self.riccati.theta();
        let theta0 = theta0_nodes(&self.spec, c, &self.kap, &self.riccati, &self.psi, bundle);
        let zeta = c.zeta_nodes(bundle);
        let values = (0..n)
            .map(|i| {
                let inv_sqrt = (-0.5 * bundle.log_gamma[i]).exp();
                inv_sqrt * ((theta[i] + self.kap.ratio[i] - 1.0) * state[i] - theta0[i])
                    + self.kap.ratio[i] * zeta[i]
            })
            .collect();
        StrategyPath::pm(self.spec.x0, values, bundle.terminal_target(&self.spec))
    }

    /// Optimal deviation: D = sqrt(gamma) u* on [t0, T),
    /// D_T = gamma_T xi + sqrt(gamma_T) H*_T.
    pub fn deviation_path(&self, bundle: &PathBundle) -> DeviationPath {
        let c = &self.coeffs;
        let n = c.n;
        let state = self.state_nodes(bundle);
        let u = self.control_nodes(bundle, &state);
        let mut values: Vec<f64> = (0..n).map(|i| bundle.sqrt_gamma[i] * u[i]).collect();
        let xi = bundle.terminal_target(&self.spec);
        values.push(bundle.gamma[n] * xi + bundle.sqrt_gamma[n] * state[n]);
        DeviationPath {
            d_pre: self.spec.d0,
            values,
        }
    }

    fn shifted_control_nodes(&self, bundle: &PathBundle, state: &[f64]) -> Vec<f64> {
        let theta = self.riccati.theta();
        let theta0 = theta0_nodes(
            &self.spec,
            &self.coeffs,
            &self.kap,
            &self.riccati,
            &self.psi,
            bundle,
        );
        (0..state.len())
            .map(|i| theta[i] * state[i] - theta0[i])
            .collect()
    }

    fn control_nodes(&self, bundle: &PathBundle, state: &[f64]) -> Vec<f64> {
        let zeta = self.coeffs.zeta_nodes(bundle);
        let uhat = self.shifted_control_nodes(bundle, state);
        (0..state.len())
            .map(|i| uhat[i] + self.kap.ratio[i] * (state[i] + bundle.sqrt_gamma[i] * zeta[i]))
            .collect()
    }

    /// Strategy source adapter for metric and cost estimators.
    pub fn strategy(&self) -> OptimalStrategySource<'_> {
        OptimalStrategySource { law: self }
    }

    /// Plain-frame optimal control source.
    pub fn control(&self) -> OptimalControlSource<'_> {
        OptimalControlSource { law: self }
    }

    /// Cross-term-free optimal control source.
    pub fn shifted_control(&self) -> OptimalShiftedControlSource<'_> {
        OptimalShiftedControlSource { law: self }
    }

    /// Cost of the optimal strategy by the value-function formula
    /// K0 h0^2 - 2 psi0 h0 + C0 - d0^2 / (2 gamma0), with C0 estimated by
    /// Monte-Carlo quadrature on the simulator's ensemble.
    pub fn formula_cost(&self, sim: &Simulator, n_paths: u64) -> Result<CostEstimate> {
        let h0 = self.spec.h0();
        let psi0 = self
            .psi
            .value(0, self.spec.targets.terminal.initial_expectation());
        let base = self.riccati.k()[0] * h0 * h0
            - 2.0 * psi0 * h0
            - self.spec.d0 * self.spec.d0 / (2.0 * self.spec.gamma0);
        if self.z_vanishes
            && matches!(self.spec.targets.terminal, TerminalTarget::Const(c) if c == 0.0)
        {
            return Ok(CostEstimate {
                mean: base,
                std_error: 0.0,
                n_paths,
                seed: sim.seed(),
            });
        }
        let c = &self.coeffs;
        let n = c.n;
        let dt = c.dt;
        let vals = mc::map_paths(sim, n_paths, |_, b| {
            let xi = b.terminal_target(&self.spec);
            let zeta = c.zeta_nodes(b);
            let theta0 = theta0_nodes(&self.spec, c, &self.kap, &self.riccati, &self.psi, b);
            let mut acc = 0.5 * b.gamma[n] * xi * xi;
            for i in 0..n {
                let r = self.kap.ratio[i];
                let g_zeta = b.gamma[i] * zeta[i] * zeta[i];
                let p = self.psi.value(i, forecast_at(&self.spec, b, i));
                acc += (self.riccati.k()[i] * r * r * g_zeta * c.quad[i]
                    + self.kap.kappa[i] * r * g_zeta
                    - theta0[i] * theta0[i] * self.riccati.denom()[i]
                    + 2.0 * r * b.sqrt_gamma[i] * zeta[i] * p * c.alpha[i])
                    * dt;
            }
            acc
        });
        let est = mean_se(&vals);
        Ok(CostEstimate {
            mean: base + est.mean,
            std_error: est.std_error,
            n_paths,
            seed: sim.seed(),
        })
    }
}

pub struct OptimalStrategySource<'a> {
    law: &'a OptimalLaw,
}

impl StrategySource for OptimalStrategySource<'_> {
    fn kind(&self) -> StrategyKind {
        StrategyKind::ProgressivelyMeasurable
    }

    fn realize(&self, coeffs: &SampledCoeffs, bundle: &PathBundle) -> StrategyPath {
        debug_assert_eq!(coeffs.n, self.law.coeffs.n);
        self.law.strategy_path(bundle)
    }
}

pub struct OptimalControlSource<'a> {
    law: &'a OptimalLaw,
}

impl crate::lq::ControlSource for OptimalControlSource<'_> {
    fn realize(&self, _coeffs: &SampledCoeffs, bundle: &PathBundle) -> ControlPath {
        let state = self.law.state_nodes(bundle);
        ControlPath {
            values: self.law.control_nodes(bundle, &state),
            cross_terms_removed: false,
        }
    }
}

pub struct OptimalShiftedControlSource<'a> {
    law: &'a OptimalLaw,
}

impl crate::lq::ControlSource for OptimalShiftedControlSource<'_> {
    fn realize(&self, _coeffs: &SampledCoeffs, bundle: &PathBundle) -> ControlPath {
        let state = self.law.state_nodes(bundle);
        ControlPath {
            values: self.law.shifted_control_nodes(bundle, &state),
            cross_terms_removed: true,
        }
    }
}
