//! Linear-quadratic reduction of the execution problem.
//!
//! The hidden deviation Hbar = D / sqrt(gamma) - sqrt(gamma) X plays the role
//! of state, the scaled deviation u = D / sqrt(gamma) the role of control.
//! Under a control u the state follows the linear SDE
//!
//!   dH = [1/2 (mu - sigma^2/4) H - alpha u] ds
//!      + [sigma/2 H - (sigma + eta rbar) u] dW1
//!      - eta sqrt(1 - rbar^2) u dW2,
//!
//! with alpha = rho + mu - (sigma^2 + sigma eta rbar)/2, integrated by
//! left-point Euler on the shared grid. A second family of dynamics with the
//! running-cost cross terms absorbed into the control is produced by
//! `integrate_state_shifted`; the two are linked by `remove_cross_terms` /
//! `restore_cross_terms`, which are exact pointwise transforms on shared
//! state arrays.

use crate::model::{ModelSpec, SampledCoeffs};
use crate::path::PathBundle;
use crate::strategy::{DeviationPath, HiddenDeviationPath, StrategyPath};

/// Control sampled at the nodes, values[i] = u at node i, i = 0..=n_steps.
#[derive(Debug, Clone)]
pub struct ControlPath {
    pub values: Vec<f64>,
    /// True when this control lives in the shifted (cross-term-free) frame.
    pub cross_terms_removed: bool,
}

/// State sampled at the nodes.
#[derive(Debug, Clone)]
pub struct StatePath {
    pub values: Vec<f64>,
}

/// Per-path control generator, pure in the bundle.
pub trait ControlSource: Sync {
    fn realize(&self, coeffs: &SampledCoeffs, bundle: &PathBundle) -> ControlPath;
}

/// The same deterministic control on every bundle.
#[derive(Debug, Clone)]
pub struct DeterministicControl {
    pub values: Vec<f64>,
    pub cross_terms_removed: bool,
}

impl ControlSource for DeterministicControl {
    fn realize(&self, _coeffs: &SampledCoeffs, _bundle: &PathBundle) -> ControlPath {
        ControlPath {
            values: self.values.clone(),
            cross_terms_removed: self.cross_terms_removed,
        }
    }
}

/// Left-point Euler for dH = (a H + b) ds + (c1 H + e1) dW1 + (c2 H + e2) dW2.
/// step(i) returns [a, b, c1, e1, c2, e2] at node i.
pub(crate) fn euler_linear(
    n: usize,
    dt: f64,
    dw1: &[f64],
    dw2: &[f64],
    h0: f64,
    step: impl Fn(usize) -> [f64; 6],
) -> Vec<f64> {
    let mut values = Vec::with_capacity(n + 1);
    let mut h = h0;
    values.push(h);
    for i in 0..n {
        let [a, b, c1, e1, c2, e2] = step(i);
        h += (a * h + b) * dt + (c1 * h + e1) * dw1[i] + (c2 * h + e2) * dw2[i];
        values.push(h);
    }
    values
}

/// State generated by a plain control u from initial state h0.
pub fn integrate_state(
    u: &[f64],
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    h0: f64,
) -> StatePath {
    let values = euler_linear(coeffs.n, coeffs.dt, &bundle.dw1, &bundle.dw2, h0, |i| {
        let drift_h = 0.5 * (coeffs.mu[i] - 0.25 * coeffs.sigma[i] * coeffs.sigma[i]);
        [
            drift_h,
            -coeffs.alpha[i] * u[i],
            0.5 * coeffs.sigma[i],
            -coeffs.sig_eff[i] * u[i],
            0.0,
            -coeffs.eta_perp[i] * u[i],
        ]
    });
    StatePath { values }
}

/// State generated by a shifted control in the cross-term-free frame. ratio
/// is lambda / (lambda + kappa) at the nodes, zeta the running target.
pub fn integrate_state_shifted(
    u_hat: &[f64],
    coeffs: &SampledCoeffs,
    bundle: &PathBundle,
    zeta: &[f64],
    ratio: &[f64],
    h0: f64,
) -> StatePath {
    let values = euler_linear(coeffs.n, coeffs.dt, &bundle.dw1, &bundle.dw2, h0, |i| {
        let w = u_hat[i] + ratio[i] * bundle.sqrt_gamma[i] * zeta[i];
        let drift_h = 0.5 * (coeffs.mu[i] - 0.25 * coeffs.sigma[i] * coeffs.sigma[i])
            - ratio[i] * coeffs.alpha[i];
        [
            drift_h,
            -coeffs.alpha[i] * w,
            0.5 * coeffs.sigma[i] - ratio[i] * coeffs.sig_eff[i],
            -coeffs.sig_eff[i] * w,
            -ratio[i] * coeffs.eta_perp[i],
            -coeffs.eta_perp[i] * w,
        ]
    });
    StatePath { values }
}

/// Scaled deviation of a strategy: u_i = D_i / sqrt(gamma_i) at every node.
pub fn strategy_to_control(dev: &DeviationPath, bundle: &PathBundle) -> ControlPath {
    let values = dev
        .values
        .iter()
        .zip(&bundle.log_gamma)
        .map(|(&d, &lg)| (-0.5 * lg).exp() * d)
        .collect();
    ControlPath {
        values,
        cross_terms_removed: false,
    }
}

/// Strategy generated by a control and its state path: X = (u - H) /
/// sqrt(gamma) on [t0, T), X_T = xi, with the matching deviation
/// D = sqrt(gamma) u on [t0, T) and D_T = gamma_T xi + sqrt(gamma_T) H_T.
/// The state path doubles as the hidden deviation of the result.
pub fn control_to_strategy(
    u: &ControlPath,
    h: &StatePath,
    spec: &ModelSpec,
    bundle: &PathBundle,
) -> (StrategyPath, DeviationPath, HiddenDeviationPath) {
    let n = bundle.dw1.len();
    debug_assert_eq!(u.values.len(), n + 1);
    debug_assert_eq!(h.values.len(), n + 1);
    let xi = bundle.terminal_target(spec);
    let mut x = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n + 1);
    for i in 0..n {
        let inv_sqrt = (-0.5 * bundle.log_gamma[i]).exp();
        x.push(inv_sqrt * (u.values[i] - h.values[i]));
        d.push(bundle.sqrt_gamma[i] * u.values[i]);
    }
    d.push(bundle.gamma[n] * xi + bundle.sqrt_gamma[n] * h.values[n]);
    (
        StrategyPath::pm(spec.x0, x, xi),
        DeviationPath {
            d_pre: spec.d0,
            values: d,
        },
        HiddenDeviationPath {
            values: h.values.clone(),
        },
    )
}

/// Shift a control into the cross-term-free frame:
/// u_hat = u - ratio (H + sqrt(gamma) zeta), with H the state of u.
pub fn remove_cross_terms(
    u: &ControlPath,
    h: &[f64],
    zeta: &[f64],
    ratio: &[f64],
    bundle: &PathBundle,
) -> ControlPath {
    debug_assert!(!u.cross_terms_removed);
    let values = (0..u.values.len())
        .map(|i| u.values[i] - ratio[i] * (h[i] + bundle.sqrt_gamma[i] * zeta[i]))
        .collect();
    ControlPath {
        values,
        cross_terms_removed: true,
    }
}

/// Inverse of `remove_cross_terms` on the same state array.
pub fn restore_cross_terms(
    u_hat: &ControlPath,
    h: &[f64],
    zeta: &[f64],
    ratio: &[f64],
    bundle: &PathBundle,
) -> ControlPath {
    debug_assert!(u_hat.cross_terms_removed);
    let values = (0..u_hat.values.len())
        .map(|i| u_hat.values[i] + ratio[i] * (h[i] + bundle.sqrt_gamma[i] * zeta[i]))
        .collect();
    ControlPath {
        values,
        cross_terms_removed: false,
    }
}
