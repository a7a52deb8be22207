//! Execution cost functionals and their equivalent representations.
//!
//! Four representations of the expected cost are implemented, pathwise and as
//! Monte-Carlo estimators:
//!
//! * `cost_fv`: the trading-cost definition for finite-variation strategies,
//!   sum of block costs D_{s-} dX + gamma (dX)^2 / 2, rate costs D dX, and the
//!   running risk lambda gamma (X - zeta)^2.
//! * `cost_pm`: the compensated form valid for any strategy, a quadratic in
//!   the deviation with running weight kappa = (2 rho + mu - sigma^2 - eta^2
//!   - 2 sigma eta rbar) / 2 and the constant offset -d0^2 / (2 gamma0).
//! * `cost_j`: the LQ functional of a control and its state path.
//! * `cost_jhat`: the same after the cross terms are absorbed into the
//!   control; requires lambda / (lambda + kappa) to be well defined.
//!
//! On shared per-path arrays, pm and its quadratic form, and j and jhat, are
//! algebraically identical; only rounding separates them. fv and pm differ by
//! a discretization error that vanishes with the step size.

use crate::error::{Error, Result};
use crate::lq::{self, ControlSource};
use crate::mc;
use crate::model::SampledCoeffs;
use crate::path::{PathBundle, Simulator};
use crate::stats::mean_se;
use crate::strategy::{
    self, DeviationPath, HiddenDeviationPath, StrategyKind, StrategyPath, StrategySource,
};

#[derive(Debug, Clone, Copy)]
pub struct CostEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub seed: u64,
}

/// kappa and lambda / (lambda + kappa) at the nodes.
#[derive(Debug, Clone)]
pub struct KappaPath {
    pub kappa: Vec<f64>,
    pub ratio: Vec<f64>,
}

/// kappa_i = rho + mu/2 - (sigma^2 + eta^2 + 2 sigma eta rbar) / 2 and the
/// cross-term ratio. The ratio is defined as 0 where lambda and lambda + kappa
/// both vanish; a zero denominator with positive lambda is rejected.
pub fn kappa_path(coeffs: &SampledCoeffs) -> Result<KappaPath> {
    let n = coeffs.n;
    let mut kappa = Vec::with_capacity(n + 1);
    let mut ratio = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let k = 0.5
            * (2.0 * coeffs.rho[i] + coeffs.mu[i]
                - coeffs.sigma[i] * coeffs.sigma[i]
                - coeffs.eta[i] * coeffs.eta[i]
                - 2.0 * coeffs.sigma[i] * coeffs.eta[i] * coeffs.rbar[i]);
        let lam = coeffs.lambda[i];
        let denom = lam + k;
        let r = if lam == 0.0 && denom == 0.0 {
            0.0
        } else if denom == 0.0 {
            return Err(Error::domain(format!(
                "lambda + kappa vanishes at node {i} with lambda = {lam}; the cross-term ratio is undefined"
            )));
        } else {
            lam / denom
        };
        kappa.push(k);
        ratio.push(r);
    }
    Ok(KappaPath { kappa, ratio })
}

/// Pathwise trading cost of a finite-variation strategy. The path must carry
/// its jump/rate structure and dev must be its deviation.
pub fn cost_fv_path(
    path: &StrategyPath,
    dev: &DeviationPath,
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
) -> f64 {
    let fv = path.fv.as_ref().expect("finite-variation structure");
    let zeta = coeffs.zeta_nodes(bundle);
    let n = path.n_steps();
    let dt = coeffs.dt;
    let mut acc = 0.0;
    for i in 0..n {
        let jump = fv.jumps[i];
        let d_pre = dev.values[i] - bundle.gamma[i] * jump;
        acc += d_pre * jump + 0.5 * bundle.gamma[i] * jump * jump;
        acc += dev.values[i] * fv.rates[i] * dt;
        let gap = path.values[i] - zeta[i];
        acc += coeffs.lambda[i] * bundle.gamma[i] * gap * gap * dt;
    }
    let tj = path.terminal_jump(dt);
    let d_pre = dev.values[n] - bundle.gamma[n] * tj;
    acc + d_pre * tj + 0.5 * bundle.gamma[n] * tj * tj
}

/// Pathwise compensated cost, valid for any strategy kind.
pub fn cost_pm_path(
    path: &StrategyPath,
    dev: &DeviationPath,
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    kap: &KappaPath,
) -> f64 {
    let zeta = coeffs.zeta_nodes(bundle);
    let n = path.n_steps();
    let dt = coeffs.dt;
    let mut acc = 0.5 * dev.values[n] * dev.values[n] / bundle.gamma[n];
    for i in 0..n {
        let d = dev.values[i];
        acc += kap.kappa[i] * d * d / bundle.gamma[i] * dt;
        let gap = path.values[i] - zeta[i];
        acc += coeffs.lambda[i] * bundle.gamma[i] * gap * gap * dt;
    }
    acc - dev.d_pre * dev.d_pre / (2.0 * bundle.gamma[0])
}

/// Cumulative compensated cost at every node: entry i is the cost accrued on
/// [t0, s_i], so entry 0 is -d0^2/(2 gamma_0) and the last entry (which adds
/// the terminal term) matches `cost_pm_path` up to summation order.
pub fn cost_pm_curve_path(
    path: &StrategyPath,
    dev: &DeviationPath,
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    kap: &KappaPath,
) -> Vec<f64> {
    let zeta = coeffs.zeta_nodes(bundle);
    let n = path.n_steps();
    let dt = coeffs.dt;
    let mut curve = Vec::with_capacity(n + 1);
    let mut acc = -dev.d_pre * dev.d_pre / (2.0 * bundle.gamma[0]);
    curve.push(acc);
    for i in 0..n {
        let d = dev.values[i];
        acc += kap.kappa[i] * d * d / bundle.gamma[i] * dt;
        let gap = path.values[i] - zeta[i];
        acc += coeffs.lambda[i] * bundle.gamma[i] * gap * gap * dt;
        curve.push(acc);
    }
    curve[n] += 0.5 * dev.values[n] * dev.values[n] / bundle.gamma[n];
    curve
}

/// Compensated cost written as a quadratic in the hidden deviation; equal to
/// `cost_pm_path` on shared arrays up to rounding.
pub fn cost_pm_quadr_path(
    path: &StrategyPath,
    dev: &DeviationPath,
    hid: &HiddenDeviationPath,
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    kap: &KappaPath,
) -> f64 {
    let zeta = coeffs.zeta_nodes(bundle);
    let n = path.n_steps();
    let dt = coeffs.dt;
    let a_t = hid.values[n] + bundle.sqrt_gamma[n] * path.xi;
    let mut acc = 0.5 * a_t * a_t;
    for i in 0..n {
        let a = (-0.5 * bundle.log_gamma[i]).exp() * dev.values[i];
        let m = hid.values[i] + bundle.sqrt_gamma[i] * zeta[i];
        let lam = coeffs.lambda[i];
        acc += ((kap.kappa[i] + lam) * a * a + lam * m * m - 2.0 * lam * m * a) * dt;
    }
    acc - dev.d_pre * dev.d_pre / (2.0 * bundle.gamma[0])
}

/// LQ cost of a control u with state path h (values at the nodes) and
/// terminal target xi.
pub fn cost_j_path(
    u: &[f64],
    h: &[f64],
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    kap: &KappaPath,
    xi: f64,
) -> f64 {
    let zeta = coeffs.zeta_nodes(bundle);
    let n = coeffs.n;
    let dt = coeffs.dt;
    let a_t = h[n] + bundle.sqrt_gamma[n] * xi;
    let mut acc = 0.5 * a_t * a_t;
    for i in 0..n {
        let m = h[i] + bundle.sqrt_gamma[i] * zeta[i];
        let lam = coeffs.lambda[i];
        acc += ((kap.kappa[i] + lam) * u[i] * u[i] + lam * m * m - 2.0 * lam * m * u[i]) * dt;
    }
    acc
}

/// LQ cost in the cross-term-free frame; equal to `cost_j_path` on shared
/// state arrays up to rounding.
pub fn cost_jhat_path(
    u_hat: &[f64],
    h: &[f64],
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    kap: &KappaPath,
    xi: f64,
) -> f64 {
    let zeta = coeffs.zeta_nodes(bundle);
    let n = coeffs.n;
    let dt = coeffs.dt;
    let a_t = h[n] + bundle.sqrt_gamma[n] * xi;
    let mut acc = 0.5 * a_t * a_t;
    for i in 0..n {
        let m = h[i] + bundle.sqrt_gamma[i] * zeta[i];
        let lam = coeffs.lambda[i];
        let k = kap.kappa[i];
        acc += (k * kap.ratio[i] * m * m + (lam + k) * u_hat[i] * u_hat[i]) * dt;
    }
    acc
}

fn wrap(est: crate::stats::MeanSe, sim: &Simulator, n_paths: u64) -> CostEstimate {
    CostEstimate {
        mean: est.mean,
        std_error: est.std_error,
        n_paths,
        seed: sim.seed(),
    }
}

/// Monte-Carlo trading cost of a finite-variation strategy source.
pub fn cost_fv(source: &dyn StrategySource, sim: &Simulator, n_paths: u64) -> Result<CostEstimate> {
    if source.kind() != StrategyKind::FiniteVariation {
        return Err(Error::domain(
            "trading-cost estimation needs a finite-variation strategy",
        ));
    }
    let coeffs = sim.coeffs();
    let d0 = sim.spec().d0;
    let vals = mc::map_paths(sim, n_paths, |_, b| {
        let p = source.realize(coeffs, b);
        let dev = strategy::deviation_fv(&p, coeffs, b, d0).expect("fv structure checked");
        cost_fv_path(&p, &dev, coeffs, b)
    });
    Ok(wrap(mean_se(&vals), sim, n_paths))
}

/// Monte-Carlo compensated cost of any strategy source.
pub fn cost_pm(source: &dyn StrategySource, sim: &Simulator, n_paths: u64) -> Result<CostEstimate> {
    let coeffs = sim.coeffs();
    let kap = kappa_path(coeffs)?;
    let d0 = sim.spec().d0;
    let kind = source.kind();
    let vals = mc::map_paths(sim, n_paths, |_, b| {
        let p = source.realize(coeffs, b);
        let dev = strategy::deviation(kind, &p, coeffs, b, d0).expect("deviation");
        cost_pm_path(&p, &dev, coeffs, b, &kap)
    });
    Ok(wrap(mean_se(&vals), sim, n_paths))
}

/// Monte-Carlo LQ cost of a control source (plain frame).
pub fn cost_j(source: &dyn ControlSource, sim: &Simulator, n_paths: u64) -> Result<CostEstimate> {
    let coeffs = sim.coeffs();
    let kap = kappa_path(coeffs)?;
    let spec = sim.spec();
    let h0 = spec.h0();
    let vals = mc::map_paths(sim, n_paths, |_, b| {
        let u = source.realize(coeffs, b);
        debug_assert!(!u.cross_terms_removed);
        let h = lq::integrate_state(&u.values, coeffs, b, h0);
        cost_j_path(
            &u.values,
            &h.values,
            coeffs,
            b,
            &kap,
            b.terminal_target(spec),
        )
    });
    Ok(wrap(mean_se(&vals), sim, n_paths))
}

/// Monte-Carlo LQ cost of a control source in the cross-term-free frame.
pub fn cost_jhat(
    source: &dyn ControlSource,
    sim: &Simulator,
    n_paths: u64,
) -> Result<CostEstimate> {
    let coeffs = sim.coeffs();
    let kap = kappa_path(coeffs)?;
    let spec = sim.spec();
    let h0 = spec.h0();
    let vals = mc::map_paths(sim, n_paths, |_, b| {
        let u = source.realize(coeffs, b);
        debug_assert!(u.cross_terms_removed);
        let zeta = coeffs.zeta_nodes(b);
        let h = lq::integrate_state_shifted(&u.values, coeffs, b, zeta, &kap.ratio, h0);
        cost_jhat_path(
            &u.values,
            &h.values,
            coeffs,
            b,
            &kap,
            b.terminal_target(spec),
        )
    });
    Ok(wrap(mean_se(&vals), sim, n_paths))
}
