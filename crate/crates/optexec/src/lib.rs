// Node-level kernels walk several parallel arrays at once; indexed loops are
// the clearer idiom for those and are kept throughout.
#![allow(clippy::needless_range_loop)]

//! Optimal trade execution under stochastic price impact and stochastic
//! resilience.
//!
//! The model: a position X is traded against an order book whose price
//! deviation D carries the accumulated impact. Impact strength gamma follows
//! geometric dynamics driven by W1; the deviation decays at a stochastic rate
//! whose integral R is itself diffusive, driven by a mix of W1 and an
//! independent W2. Costs combine the cash spent crossing the deviation with a
//! running risk penalty lambda gamma (X - zeta)^2 and a terminal constraint
//! X_T = xi.
//!
//! The crate provides the simulation core (exact impact paths, Euler
//! resilience), deviation processes and an execution metric for strategies,
//! equivalent cost functionals down to a linear-quadratic control problem,
//! the Riccati-based optimal strategy, closed-form benchmark families, and a
//! batch runner with a CLI.

pub mod closed_form;
pub mod coeff;
pub mod config;
pub mod cost;
pub mod error;
pub mod grid;
pub mod lambert;
pub mod lq;
pub mod mc;
pub mod model;
pub mod path;
pub mod report;
pub mod rng;
pub mod runner;
pub mod solver;
pub mod stats;
pub mod strategy;

pub use error::{Error, Result};
