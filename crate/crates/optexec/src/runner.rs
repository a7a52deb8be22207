//! Experiment dispatch: turns a resolved configuration into result records,
//! series arrays, and output files.
//!
//! Everything here is deterministic in (config, seed). Ensemble reductions
//! run over fixed-size path blocks that are summed sequentially inside a
//! block and pairwise across blocks, so the emitted bytes do not depend on
//! the rayon pool size.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind, StrategyChoice};
use crate::cost::{self, CostEstimate};
use crate::error::Result;
use crate::mc;
use crate::model::ModelSpec;
use crate::path::{PathBundle, Simulator};
use crate::report::{
    write_manifest_json, write_results_csv, write_series_json, Manifest, ResultRecord, Series,
};
use crate::solver::{self, OptimalLaw};
use crate::stats::pairwise_sum;
use crate::strategy::{
    self, close_now, hold_then_close, no_trade, twap, FvApproximation, StrategyKind, StrategyPath,
    StrategySource,
};

/// One report-only assertion from the validate experiment.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
}

/// Everything an experiment produces before serialization.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    pub series: Series,
    pub checks: Vec<Check>,
}

/// Runs the configured experiment and writes results.csv, series.json, and
/// manifest.json into `out_dir` (created if missing).
pub fn run_to_dir(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput> {
    let start = Instant::now();
    let out = execute(cfg)?;
    std::fs::create_dir_all(out_dir)?;
    write_results_csv(&out_dir.join("results.csv"), &out.records)?;
    write_series_json(&out_dir.join("series.json"), &out.series)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.experiment_id(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        n_paths: cfg.n_paths,
        n_steps: cfg.n_steps,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    write_manifest_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(out)
}

/// Runs the configured experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = cfg.model_spec()?;
    let sim = Simulator::new(spec.clone(), cfg.seed)?;
    match cfg.kind {
        ExperimentKind::Solve | ExperimentKind::Example => run_solve(cfg, &spec, &sim),
        ExperimentKind::Compare => run_compare(cfg, &spec, &sim),
        ExperimentKind::Approximate => run_approximate(cfg, &spec, &sim),
        ExperimentKind::Validate => run_validate(cfg, &spec, &sim),
    }
}

fn record(cfg: &ExperimentConfig, metric: &str, value: f64, std_error: f64) -> ResultRecord {
    ResultRecord {
        experiment: cfg.experiment_id(),
        config_hash: cfg.hash(),
        metric: metric.to_string(),
        value,
        std_error,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
    }
}

fn cost_record(cfg: &ExperimentConfig, metric: &str, est: &CostEstimate) -> ResultRecord {
    record(cfg, metric, est.mean, est.std_error)
}

/// Paths per deterministic reduction block.
const BLOCK: u64 = 256;

/// Sums `width` per-path node quantities over the ensemble: sequential within
/// a block, pairwise across blocks, invariant to the thread count.
fn node_sums<F>(sim: &Simulator, n_paths: u64, width: usize, f: F) -> Vec<f64>
where
    F: Fn(&PathBundle, &mut [f64]) + Sync,
{
    let n_blocks = n_paths.div_ceil(BLOCK);
    let blocks: Vec<Vec<f64>> = (0..n_blocks)
        .into_par_iter()
        .map(|blk| {
            let mut acc = vec![0.0; width];
            let start = blk * BLOCK;
            let end = (start + BLOCK).min(n_paths);
            for p in start..end {
                let bundle = sim.bundle(p);
                f(&bundle, &mut acc);
            }
            acc
        })
        .collect();
    (0..width)
        .map(|i| {
            let col: Vec<f64> = blocks.iter().map(|b| b[i]).collect();
            pairwise_sum(&col)
        })
        .collect()
}

/// K, theta, ensemble-mean optimal path, and ensemble-mean cumulative cost.
fn law_series(
    cfg: &ExperimentConfig,
    spec: &ModelSpec,
    sim: &Simulator,
    law: &OptimalLaw,
) -> Series {
    let n = spec.grid.n_steps();
    let kap = law.kappa();
    let coeffs = sim.coeffs();
    let sums = node_sums(sim, cfg.n_paths, 2 * (n + 1), |bundle, acc| {
        let path = law.strategy_path(bundle);
        let dev = law.deviation_path(bundle);
        let curve = cost::cost_pm_curve_path(&path, &dev, coeffs, bundle, kap);
        for i in 0..n {
            acc[i] += path.values[i];
        }
        acc[n] += path.xi;
        for i in 0..=n {
            acc[n + 1 + i] += curve[i];
        }
    });
    let inv = 1.0 / cfg.n_paths as f64;
    Series {
        times: spec.grid.nodes(),
        k: law.riccati().k().to_vec(),
        theta: law.riccati().theta().to_vec(),
        mean_xstar: sums[..=n].iter().map(|s| s * inv).collect(),
        cost_curve: sums[n + 1..].iter().map(|s| s * inv).collect(),
    }
}

fn run_solve(cfg: &ExperimentConfig, spec: &ModelSpec, sim: &Simulator) -> Result<RunOutput> {
    let law = solver::solve(spec)?;
    let formula = law.formula_cost(sim, cfg.n_paths)?;
    let optimal = law.strategy();
    let mc_cost = cost::cost_pm(&optimal, sim, cfg.n_paths)?;
    let records = vec![
        cost_record(cfg, "optimal_cost_formula", &formula),
        cost_record(cfg, "optimal_cost_mc", &mc_cost),
    ];
    let series = law_series(cfg, spec, sim, &law);
    Ok(RunOutput {
        records,
        series,
        checks: Vec::new(),
    })
}

/// The optimal path plus a fixed deterministic displacement at the interior
/// nodes; boundary data (pre-initial position, terminal target) unchanged.
struct PerturbedOptimal<'a> {
    law: &'a OptimalLaw,
    shape: Vec<f64>,
}

impl StrategySource for PerturbedOptimal<'_> {
    fn kind(&self) -> StrategyKind {
        StrategyKind::ProgressivelyMeasurable
    }

    fn realize(&self, _coeffs: &crate::model::SampledCoeffs, bundle: &PathBundle) -> StrategyPath {
        let mut path = self.law.strategy_path(bundle);
        for (v, s) in path.values.iter_mut().zip(&self.shape) {
            *v += s;
        }
        path.fv = None;
        path
    }
}

/// Compensated costs of the optimal strategy and the five fixed rivals
/// (uniform unwind, initial block, terminal block, sine bump of size
/// `epsilon`, linear tilt of size `epsilon`), all under common random
/// numbers. The optimal comes first.
pub fn compare_costs(
    law: &OptimalLaw,
    sim: &Simulator,
    n_paths: u64,
    epsilon: f64,
) -> Result<Vec<(&'static str, CostEstimate)>> {
    let spec = law.spec();
    let n = spec.grid.n_steps();
    let horizon = spec.grid.horizon();
    let t0 = spec.grid.t0();
    let optimal = law.strategy();
    let bump = PerturbedOptimal {
        law,
        shape: (0..n)
            .map(|i| {
                let s = spec.grid.node(i);
                epsilon * (std::f64::consts::PI * (s - t0) / horizon).sin()
            })
            .collect(),
    };
    let tilt = PerturbedOptimal {
        law,
        shape: (0..n)
            .map(|i| {
                let s = spec.grid.node(i);
                epsilon * (2.0 * (s - t0) / horizon - 1.0)
            })
            .collect(),
    };
    let rivals: [(&'static str, &dyn StrategySource); 6] = [
        ("cost_optimal", &optimal),
        ("cost_twap", &twap(spec)?),
        ("cost_block_initial", &close_now(spec)?),
        ("cost_block_terminal", &hold_then_close(spec)?),
        ("cost_bump", &bump),
        ("cost_tilt", &tilt),
    ];
    let mut out = Vec::with_capacity(6);
    for (metric, source) in rivals {
        out.push((metric, cost::cost_pm(source, sim, n_paths)?));
    }
    Ok(out)
}

fn run_compare(cfg: &ExperimentConfig, spec: &ModelSpec, sim: &Simulator) -> Result<RunOutput> {
    let law = solver::solve(spec)?;
    let formula = law.formula_cost(sim, cfg.n_paths)?;
    let mut records = vec![cost_record(cfg, "optimal_cost_formula", &formula)];
    for (metric, est) in compare_costs(&law, sim, cfg.n_paths, cfg.epsilon)? {
        records.push(cost_record(cfg, metric, &est));
    }
    let series = law_series(cfg, spec, sim, &law);
    Ok(RunOutput {
        records,
        series,
        checks: Vec::new(),
    })
}

fn run_approximate(cfg: &ExperimentConfig, spec: &ModelSpec, sim: &Simulator) -> Result<RunOutput> {
    let law = solver::solve(spec)?;
    let optimal = law.strategy();
    let control = law.control();
    let mut records = vec![cost_record(
        cfg,
        "cost_pm_optimal",
        &cost::cost_pm(&optimal, sim, cfg.n_paths)?,
    )];
    for level in 2..=cfg.max_level {
        let approx = FvApproximation::new(&control, spec, level)?;
        let metric = strategy::strategy_metric(&approx, &optimal, sim, cfg.n_paths)?;
        let fv_cost = cost::cost_fv(&approx, sim, cfg.n_paths)?;
        records.push(record(
            cfg,
            &format!("distance_l{level:02}"),
            metric.distance,
            metric.std_error,
        ));
        records.push(cost_record(cfg, &format!("cost_fv_l{level:02}"), &fv_cost));
    }
    let series = law_series(cfg, spec, sim, &law);
    Ok(RunOutput {
        records,
        series,
        checks: Vec::new(),
    })
}

fn run_validate(cfg: &ExperimentConfig, spec: &ModelSpec, sim: &Simulator) -> Result<RunOutput> {
    let law = match cfg.strategy {
        StrategyChoice::Optimal => Some(solver::solve(spec)?),
        _ => None,
    };
    let optimal = law.as_ref().map(|l| l.strategy());
    let fixed = match cfg.strategy {
        StrategyChoice::Optimal => None,
        StrategyChoice::Twap => Some(twap(spec)?),
        StrategyChoice::NoTrade => Some(no_trade(spec)),
        StrategyChoice::CloseNow => Some(close_now(spec)?),
        StrategyChoice::HoldThenClose => Some(hold_then_close(spec)?),
    };
    let source: &dyn StrategySource = match (&optimal, &fixed) {
        (Some(s), _) => s,
        (None, Some(f)) => f,
        (None, None) => unreachable!("every strategy choice is covered"),
    };

    let coeffs = sim.coeffs();
    let n = spec.grid.n_steps();
    let dt = spec.grid.dt();
    let d0 = spec.d0;
    let kind = source.kind();
    {
        // Surface per-path failures once, outside the parallel sweep.
        let probe = sim.bundle(0);
        let path = source.realize(coeffs, &probe);
        strategy::deviation(kind, &path, coeffs, &probe, d0)?;
    }
    let [m_target, m_running, m_deviation] = mc::estimate_multi(sim, cfg.n_paths, |bundle| {
        let xi = bundle.terminal_target(spec);
        let moment_target = bundle.gamma[n] * xi * xi;
        let zeta = coeffs.zeta_nodes(bundle);
        let mut moment_running = 0.0;
        for i in 0..n {
            moment_running += bundle.gamma[i] * zeta[i] * zeta[i] * dt;
        }
        let path = source.realize(coeffs, bundle);
        let dev = strategy::deviation(kind, &path, coeffs, bundle, d0)
            .expect("deviation checked on the probe path");
        let mut moment_deviation = 0.0;
        for i in 0..n {
            moment_deviation += dev.values[i] * dev.values[i] / bundle.gamma[i] * dt;
        }
        [moment_target, moment_running, moment_deviation]
    });

    let named = [
        ("target_second_moment", m_target),
        ("running_target_moment", m_running),
        ("deviation_second_moment", m_deviation),
    ];
    let mut records = Vec::new();
    let mut checks = Vec::new();
    for (name, est) in named {
        records.push(record(cfg, name, est.mean, est.std_error));
        let passed = est.mean.is_finite() && est.std_error.is_finite();
        records.push(record(
            cfg,
            &format!("{name}_finite"),
            if passed { 1.0 } else { 0.0 },
            0.0,
        ));
        checks.push(Check {
            name: format!("{name}_finite"),
            passed,
            value: est.mean,
        });
    }
    let series = Series {
        times: spec.grid.nodes(),
        ..Series::default()
    };
    Ok(RunOutput {
        records,
        series,
        checks,
    })
}
