//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line. Tolerances follow the library contracts; Monte-Carlo
//! checks run at 10^4 paths and 10^3 steps unless a criterion needs a
//! different resolution to be meaningful.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};

use optexec::closed_form::{self, ExampleConfig, ExampleKind};
use optexec::coeff::Coefficient;
use optexec::cost::{self, kappa_path};
use optexec::grid::TimeGrid;
use optexec::lambert::lambert_w0;
use optexec::lq;
use optexec::mc;
use optexec::model::{ModelSpec, TargetSpec};
use optexec::path::{
    coarsen_increments, simulate_brownian, BrownianIncrements, PathBundle, Simulator,
};
use optexec::solver;
use optexec::stats::{log_log_slope, mean_se, sample_variance, total_variation, variance_se};
use optexec::strategy::{self, FvApproximation, StrategyPath, StrategySource};

fn criterion<F: FnOnce()>(id: u32, name: &str, f: F) {
    let outcome = catch_unwind(AssertUnwindSafe(f));
    match outcome {
        Ok(()) => println!("criterion {id:02} {name}: PASS"),
        Err(payload) => {
            println!("criterion {id:02} {name}: FAIL");
            resume_unwind(payload);
        }
    }
}

fn combined_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// Deterministic pseudo-random values in [-1, 1).
struct Lcg(u64);

impl Lcg {
    fn next_unit(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 52) as f64) * 2.0 - 1.0
    }
}

fn example_spec(kind: ExampleKind, n_steps: usize) -> ModelSpec {
    ExampleConfig::new(kind, n_steps).model_spec().unwrap()
}

/// Mixed-noise model used by the property checks (risk weight optional).
fn noisy_spec(n: usize, lambda: f64) -> ModelSpec {
    ModelSpec::with_constants(
        TimeGrid::new(0.0, 1.0, n).unwrap(),
        1.5,
        0.1,
        0.3,
        0.9,
        0.4,
        0.25,
        lambda,
        TargetSpec::liquidate(),
        1.0,
        0.3,
    )
    .unwrap()
}

#[test]
fn criterion_01_riccati_oracle_agreement() {
    criterion(1, "riccati oracle agreement", || {
        let n = 1000;
        let families: [(&str, ModelSpec, Vec<f64>, f64); 4] = {
            let ow0 = example_spec(ExampleKind::OwDeterministic, n);
            let ow0_times = ow0.grid.nodes();
            let ow1 = ModelSpec::with_constants(
                TimeGrid::new(0.0, 1.0, n).unwrap(),
                1.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                1.0,
                TargetSpec::liquidate(),
                1.0,
                0.2,
            )
            .unwrap();
            let lam = example_spec(ExampleKind::DiffusiveResilience, n);
            let canc = example_spec(ExampleKind::NoiseCancellation, n);
            [
                (
                    "block-decay without risk",
                    ow0.clone(),
                    closed_form::ow_k(1.0, 0.0, 0.0, 1.0, &ow0_times),
                    1e-8,
                ),
                (
                    "block-decay with unit risk",
                    ow1,
                    closed_form::ow_k(1.0, 1.0, 0.0, 1.0, &ow0_times),
                    1e-8,
                ),
                (
                    "diffusive resilience",
                    lam,
                    closed_form::diffusive_resilience_k(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, &ow0_times)
                        .unwrap(),
                    1e-6,
                ),
                (
                    "noise cancellation",
                    canc,
                    closed_form::ow_k(1.0, 0.0, 0.0, 1.0, &ow0_times),
                    1e-8,
                ),
            ]
        };
        for (name, spec, oracle, tol) in families {
            let sol = solver::solve_k(&spec).unwrap();
            let k = sol.k();
            assert_eq!(k.len(), oracle.len(), "{name}: node count");
            let worst = k
                .iter()
                .zip(&oracle)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(worst < tol, "{name}: worst gap {worst:e} vs {tol:e}");
            assert_eq!(k[n], 0.5, "{name}: terminal value must be exact");
            assert!(
                k.iter().all(|&v| v > 0.0 && v <= 0.5),
                "{name}: range violation"
            );
        }
    });
}

/// Trading-cost side of the pathwise identity with the raw nu^{-2} gamma^{-1}
/// increments on the right.
fn compensated_rhs(dev: &strategy::DeviationPath, b: &PathBundle) -> f64 {
    let n = dev.values.len() - 1;
    let mut comp = 0.0;
    for i in 0..n {
        let w_i = 1.0 / (b.nu[i] * b.nu[i] * b.gamma[i]);
        let w_ip = 1.0 / (b.nu[i + 1] * b.nu[i + 1] * b.gamma[i + 1]);
        comp += dev.values[i] * dev.values[i] * b.nu[i] * b.nu[i] * (w_ip - w_i);
    }
    0.5 * (dev.values[n] * dev.values[n] / b.gamma[n] - dev.d_pre * dev.d_pre / b.gamma[0] - comp)
}

/// A finite-variation strategy from a grid-independent description: four
/// blocks at fixed times and a rate that is constant on each quarter.
fn randomized_fv(
    spec: &ModelSpec,
    jumps_at: &[(f64, f64)],
    rate_levels: &[f64; 4],
) -> StrategyPath {
    let n = spec.grid.n_steps();
    let dt = spec.grid.dt();
    let mut jumps = vec![0.0; n];
    for &(tau, size) in jumps_at {
        let idx = (tau * n as f64).round() as usize;
        jumps[idx] += size;
    }
    let rates: Vec<f64> = (0..n).map(|i| rate_levels[4 * i / n]).collect();
    StrategyPath::from_fv(spec.x0, 0.0, jumps, rates, dt).unwrap()
}

#[test]
fn criterion_02_pathwise_identity_order() {
    criterion(2, "pathwise trading-cost identity", || {
        let steps = [250usize, 500, 1000, 2000];
        let fine_n = 2000;
        let fine_dt = 1.0 / fine_n as f64;
        let specs: Vec<ModelSpec> = steps.iter().map(|&n| noisy_spec(n, 0.0)).collect();
        let coeffs: Vec<_> = specs.iter().map(|s| s.sample()).collect();

        let mut rng = Lcg(2024);
        let mut strategies = Vec::new();
        for _ in 0..20 {
            let jumps_at = [
                (19.0 / 125.0, 0.4 * rng.next_unit()),
                (50.0 / 125.0, 0.4 * rng.next_unit()),
                (81.0 / 125.0, 0.4 * rng.next_unit()),
                (113.0 / 125.0, 0.4 * rng.next_unit()),
            ];
            let rates = [
                rng.next_unit(),
                rng.next_unit(),
                rng.next_unit(),
                rng.next_unit(),
            ];
            strategies.push((jumps_at, rates));
        }

        let mut rms = Vec::new();
        for (idx, &n) in steps.iter().enumerate() {
            let factor = fine_n / n;
            let mut sq = 0.0;
            let mut count = 0usize;
            for path in 0..8u64 {
                let fine = simulate_brownian(77, path, fine_n, fine_dt);
                let inc = BrownianIncrements {
                    dw1: coarsen_increments(&fine.dw1, factor),
                    dw2: coarsen_increments(&fine.dw2, factor),
                    dw3: coarsen_increments(&fine.dw3, factor),
                };
                let bundle = PathBundle::from_increments(&specs[idx], &coeffs[idx], inc);
                for (jumps_at, rates) in &strategies {
                    let p = randomized_fv(&specs[idx], jumps_at, rates);
                    let dev =
                        strategy::deviation_fv(&p, &coeffs[idx], &bundle, specs[idx].d0).unwrap();
                    let gap = cost::cost_fv_path(&p, &dev, &coeffs[idx], &bundle)
                        - compensated_rhs(&dev, &bundle);
                    sq += gap * gap;
                    count += 1;
                }
            }
            rms.push((sq / count as f64).sqrt());
        }
        let xs: Vec<f64> = steps.iter().map(|&n| n as f64).collect();
        let slope = log_log_slope(&xs, &rms);
        assert!(
            slope <= -0.4,
            "fitted decay order {:.3} below 0.4 (rms {rms:?})",
            -slope
        );
    });
}

#[test]
fn criterion_03_cost_equivalences() {
    criterion(3, "cost representation equivalences", || {
        // Ensemble agreement of the two cost representations.
        let spec = noisy_spec(1000, 0.4);
        let sim = Simulator::new(spec.clone(), 303).unwrap();
        let s = strategy::twap(&spec).unwrap();
        let fv = cost::cost_fv(&s, &sim, 10_000).unwrap();
        let pm = cost::cost_pm(&s, &sim, 10_000).unwrap();
        let gap = (fv.mean - pm.mean).abs();
        let band = 3.0 * combined_se(fv.std_error, pm.std_error);
        assert!(
            gap < band,
            "fv {} vs pm {} (band {band:e})",
            fv.mean,
            pm.mean
        );

        // Pathwise frame changes on shared arrays.
        let spec = noisy_spec(500, 0.7);
        let sim = Simulator::new(spec.clone(), 304).unwrap();
        let s = strategy::twap(&spec).unwrap();
        let coeffs = sim.coeffs();
        let kap = kappa_path(coeffs).unwrap();
        let offset = spec.d0 * spec.d0 / (2.0 * spec.gamma0);
        for path in 0..8 {
            let b = sim.bundle(path);
            let p = s.realize(coeffs, &b);
            let dev = strategy::deviation_fv(&p, coeffs, &b, spec.d0).unwrap();
            let hid = strategy::hidden_deviation(&p, &dev, &b);
            let u = lq::strategy_to_control(&dev, &b);
            let xi = b.terminal_target(&spec);

            let pm_cost = cost::cost_pm_path(&p, &dev, coeffs, &b, &kap);
            let j = cost::cost_j_path(&u.values, &hid.values, coeffs, &b, &kap, xi);
            assert!(
                (j - (pm_cost + offset)).abs() < 1e-10 * j.abs().max(1.0),
                "path {path}: lq cost {j} vs compensated {pm_cost} + {offset}"
            );

            let zeta = coeffs.zeta_nodes(&b);
            let shifted = lq::remove_cross_terms(&u, &hid.values, zeta, &kap.ratio, &b);
            let jh = cost::cost_jhat_path(&shifted.values, &hid.values, coeffs, &b, &kap, xi);
            assert!(
                (j - jh).abs() < 1e-10 * j.abs().max(1.0),
                "path {path}: {j} vs {jh} after removing cross terms"
            );
        }
    });
}

#[test]
fn criterion_04_perturbation_optimality() {
    criterion(4, "optimal beats fixed perturbations", || {
        let n_paths = 10_000u64;
        let eps = 0.05;
        let kinds = [
            ExampleKind::OwDeterministic,
            ExampleKind::RoughDrift,
            ExampleKind::DiffusiveResilience,
            ExampleKind::NoiseCancellation,
        ];
        for kind in kinds {
            let name = kind.name();
            let spec = example_spec(kind, 1000);
            let sim = Simulator::new(spec.clone(), 404).unwrap();
            let law = solver::solve(&spec).unwrap();
            let n = spec.grid.n_steps();
            let kap = law.kappa();
            let coeffs = sim.coeffs();

            let fixed = [
                ("twap", strategy::twap(&spec).unwrap()),
                ("block_initial", strategy::close_now(&spec).unwrap()),
                ("block_terminal", strategy::hold_then_close(&spec).unwrap()),
            ];
            let shapes: [(&str, Vec<f64>); 2] = [
                (
                    "bump",
                    (0..n)
                        .map(|i| eps * (std::f64::consts::PI * spec.grid.node(i)).sin())
                        .collect(),
                ),
                (
                    "tilt",
                    (0..n)
                        .map(|i| eps * (2.0 * spec.grid.node(i) - 1.0))
                        .collect(),
                ),
            ];

            // Common random numbers: every cost is evaluated on the same
            // bundle, and the comparison is on the per-path differences.
            let rows = mc::map_paths(&sim, n_paths, |_, b| {
                let pm = strategy::StrategyKind::ProgressivelyMeasurable;
                let opt_path = law.strategy_path(b);
                let opt_dev = strategy::deviation(pm, &opt_path, coeffs, b, spec.d0).unwrap();
                let c_opt = cost::cost_pm_path(&opt_path, &opt_dev, coeffs, b, kap);
                let mut out = [c_opt, 0.0, 0.0, 0.0, 0.0, 0.0];
                for (slot, (_, s)) in fixed.iter().enumerate() {
                    let p = s.realize(coeffs, b);
                    let dev = strategy::deviation(s.kind, &p, coeffs, b, spec.d0).unwrap();
                    out[1 + slot] = cost::cost_pm_path(&p, &dev, coeffs, b, kap) - c_opt;
                }
                for (slot, (_, shape)) in shapes.iter().enumerate() {
                    let mut p = opt_path.clone();
                    for (v, s) in p.values.iter_mut().zip(shape) {
                        *v += s;
                    }
                    p.fv = None;
                    let dev = strategy::deviation(pm, &p, coeffs, b, spec.d0).unwrap();
                    out[4 + slot] = cost::cost_pm_path(&p, &dev, coeffs, b, kap) - c_opt;
                }
                out
            });
            let rival_names = ["twap", "block_initial", "block_terminal", "bump", "tilt"];
            for (slot, metric) in rival_names.iter().enumerate() {
                let col: Vec<f64> = rows.iter().map(|r| r[1 + slot]).collect();
                let diff = mean_se(&col);
                assert!(
                    diff.mean > 2.0 * diff.std_error,
                    "{name}/{metric}: excess {:e} not above {:e}",
                    diff.mean,
                    2.0 * diff.std_error
                );
            }
            let opt_col: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let optimal = mean_se(&opt_col);

            // Discretization allowance fitted under common random numbers:
            // coarsened-increment costs at 250/500/1000 steps estimate the
            // first-order bias left at the finest grid.
            let steps = [250usize, 500, 1000];
            let fams: Vec<(ModelSpec, solver::OptimalLaw)> = steps
                .iter()
                .map(|&m| {
                    let s = example_spec(kind, m);
                    let l = solver::solve(&s).unwrap();
                    (s, l)
                })
                .collect();
            let coeffs: Vec<_> = fams.iter().map(|(s, _)| s.sample()).collect();
            let fine_dt = 1.0 / 1000.0;
            let rows = mc::map_paths(&sim, 2000, |p, _| {
                let fine = simulate_brownian(404, p, 1000, fine_dt);
                let mut out = [0.0f64; 3];
                for (idx, &m) in steps.iter().enumerate() {
                    let factor = 1000 / m;
                    let inc = BrownianIncrements {
                        dw1: coarsen_increments(&fine.dw1, factor),
                        dw2: coarsen_increments(&fine.dw2, factor),
                        dw3: coarsen_increments(&fine.dw3, factor),
                    };
                    let (s, l) = &fams[idx];
                    let bundle = PathBundle::from_increments(s, &coeffs[idx], inc);
                    // Price through the same deviation reconstruction the
                    // cost rows use, so the fit sees the same bias.
                    let path = l.strategy_path(&bundle);
                    let dev = strategy::deviation(
                        strategy::StrategyKind::ProgressivelyMeasurable,
                        &path,
                        &coeffs[idx],
                        &bundle,
                        s.d0,
                    )
                    .unwrap();
                    out[idx] = cost::cost_pm_path(&path, &dev, &coeffs[idx], &bundle, l.kappa());
                }
                out
            });
            let halving: Vec<f64> = rows.iter().map(|r| r[1] - r[2]).collect();
            let fit = mean_se(&halving);
            // First-order kernels leave roughly the last halving gap as bias;
            // doubled for safety, plus the fit's own noise.
            let allowance = 2.0 * fit.mean.abs() + 3.0 * fit.std_error;

            let formula = law.formula_cost(&sim, n_paths).unwrap();
            let gap = (optimal.mean - formula.mean).abs();
            let band = 3.0 * combined_se(optimal.std_error, formula.std_error) + allowance;
            assert!(
                gap < band,
                "{name}: simulated optimal {} vs formula {} (band {band:e})",
                optimal.mean,
                formula.mean
            );
        }
    });
}

#[test]
fn criterion_05_block_sale_sanity() {
    criterion(5, "single-block benchmark", || {
        let spec = {
            let mut cfg = ExampleConfig::new(ExampleKind::OwDeterministic, 1000);
            cfg.d0 = 0.0;
            cfg.model_spec().unwrap()
        };
        let sim = Simulator::new(spec.clone(), 505).unwrap();
        let block = strategy::close_now(&spec).unwrap();
        let est = cost::cost_fv(&block, &sim, 100).unwrap();
        assert_eq!(est.mean, 0.5 * spec.gamma0, "block cost must be exact");
        assert_eq!(est.std_error, 0.0);

        let law = solver::solve(&spec).unwrap();
        let opt = law.formula_cost(&sim, 100).unwrap();
        let oracle = spec.gamma0 / (2.0 + 1.0);
        assert!(
            (opt.mean - oracle).abs() < 1e-10,
            "{} vs {oracle}",
            opt.mean
        );
        assert!(
            opt.mean < 0.5 * spec.gamma0,
            "resilience must beat the naive block"
        );
    });
}

#[test]
fn criterion_06_random_target_mean_path() {
    criterion(6, "random-target ensemble mean", || {
        let n = 1000;
        let spec = example_spec(ExampleKind::OwRandomTarget, n);
        let sim = Simulator::new(spec.clone(), 606).unwrap();
        let law = solver::solve(&spec).unwrap();
        let n_paths = 10_000u64;

        let probes: Vec<usize> = (1..=9).map(|k| k * n / 10).collect();
        let rows = mc::map_paths(&sim, n_paths, |_, b| {
            let p = law.strategy_path(b);
            let xi = b.terminal_target(&spec);
            assert_eq!(p.xi, xi, "terminal position must be pinned pathwise");
            let mut out = Vec::with_capacity(probes.len() + 1);
            for &i in &probes {
                out.push(p.values[i]);
            }
            out.push(p.xi);
            out
        });

        let det = closed_form::ow_strategy_deterministic(
            spec.x0,
            0.0,
            spec.d0,
            spec.gamma0,
            1.0,
            0.0,
            1.0,
            &spec.grid.nodes(),
        );
        for (slot, &i) in probes.iter().enumerate() {
            let col: Vec<f64> = rows.iter().map(|r| r[slot]).collect();
            let est = mean_se(&col);
            let gap = (est.mean - det[i]).abs();
            assert!(
                gap < 3.0 * est.std_error,
                "node {i}: mean {} vs deterministic {} (se {:e})",
                est.mean,
                det[i],
                est.std_error
            );
        }
        let terminal: Vec<f64> = rows.iter().map(|r| *r.last().unwrap()).collect();
        let est = mean_se(&terminal);
        assert!(
            est.mean.abs() < 3.0 * est.std_error,
            "terminal mean {} vs 0",
            est.mean
        );
    });
}

#[test]
fn criterion_07_continuous_extension() {
    criterion(7, "finite-variation approximation", || {
        let spec = example_spec(ExampleKind::DiffusiveResilience, 1024);
        let sim = Simulator::new(spec.clone(), 707).unwrap();
        let law = solver::solve(&spec).unwrap();
        let optimal = law.strategy();
        let control = law.control();
        let n_paths = 10_000u64;

        let mut distances = Vec::new();
        let mut last_cost = None;
        for level in 2..=8u32 {
            let approx = FvApproximation::new(&control, &spec, level).unwrap();
            let metric = strategy::strategy_metric(&approx, &optimal, &sim, n_paths).unwrap();
            distances.push(metric.distance);
            if level == 8 {
                last_cost = Some(cost::cost_fv(&approx, &sim, n_paths).unwrap());
            }
        }
        let first = distances[0];
        let last = *distances.last().unwrap();
        assert!(
            last * 5.0 <= first,
            "distance shrank only {first:e} -> {last:e}"
        );

        let fv = last_cost.unwrap();
        let pm = cost::cost_pm(&optimal, &sim, n_paths).unwrap();
        let gap = (fv.mean - pm.mean).abs();
        let band = 3.0 * combined_se(fv.std_error, pm.std_error);
        assert!(
            gap < band,
            "approximant cost {} vs optimal {} (band {band:e})",
            fv.mean,
            pm.mean
        );
    });
}

#[test]
fn criterion_08_noise_cancellation() {
    criterion(8, "noise cancellation", || {
        let n = 1000;
        let spec = example_spec(ExampleKind::NoiseCancellation, n);
        let sim = Simulator::new(spec.clone(), 808).unwrap();
        let law = solver::solve(&spec).unwrap();
        let n_paths = 10_000u64;

        let rows = mc::map_paths(&sim, n_paths, |_, b| {
            let p = law.strategy_path(b);
            let dev = law.deviation_path(b);
            (p.values, dev.values[n / 2])
        });
        for i in 0..n {
            let col: Vec<f64> = rows.iter().map(|r| r.0[i]).collect();
            let var = sample_variance(&col);
            assert!(var < 1e-20, "node {i}: strategy variance {var:e}");
        }
        let mid: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let var = sample_variance(&mid);
        let se = variance_se(&mid);
        assert!(
            var > 5.0 * se,
            "mid-horizon deviation variance {var:e} not positive at 5 sigma ({se:e})"
        );
    });
}

#[test]
fn criterion_09_rough_drift_gain_variation() {
    criterion(9, "rough drift excites the feedback gain", || {
        let theta_tv = |mu: Coefficient, n: usize| {
            let spec = ModelSpec::with_constants(
                TimeGrid::new(0.0, 1.0, n).unwrap(),
                1.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                0.0,
                TargetSpec::liquidate(),
                1.0,
                0.2,
            )
            .map(|mut s| {
                s.mu = mu.clone();
                s
            })
            .unwrap();
            total_variation(solver::solve_k(&spec).unwrap().theta())
        };

        let rough = closed_form::rough_drift_mu(0.0, 1.0);
        let tv_coarse = theta_tv(rough.clone(), 1000);
        let tv_fine = theta_tv(rough, 10_000);
        assert!(
            tv_fine >= 2.0 * tv_coarse,
            "rough gain variation grew only {tv_coarse:e} -> {tv_fine:e}"
        );

        let smooth = Coefficient::time_fn(|s| 0.3 * (2.0 * std::f64::consts::PI * s).sin());
        let sm_coarse = theta_tv(smooth.clone(), 1000);
        let sm_fine = theta_tv(smooth, 10_000);
        assert!(
            (sm_fine / sm_coarse - 1.0).abs() <= 0.10,
            "smooth gain variation moved {sm_coarse:e} -> {sm_fine:e}"
        );
    });
}

#[test]
fn criterion_10_metric_axioms() {
    criterion(10, "execution metric axioms", || {
        let spec = noisy_spec(128, 0.0);
        let sim = Simulator::new(spec.clone(), 1010).unwrap();
        let n_paths = 256u64;
        let mut rng = Lcg(5150);
        let mut random_strategy = || {
            let n = spec.grid.n_steps();
            let jumps: Vec<f64> = (0..n).map(|_| 0.05 * rng.next_unit()).collect();
            let rates: Vec<f64> = (0..n).map(|_| rng.next_unit()).collect();
            strategy::FixedStrategy {
                kind: strategy::StrategyKind::FiniteVariation,
                path: StrategyPath::from_fv(spec.x0, 0.0, jumps, rates, spec.grid.dt()).unwrap(),
            }
        };
        for triple in 0..50 {
            let (a, b, c) = (random_strategy(), random_strategy(), random_strategy());
            let self_dist = strategy::strategy_metric(&a, &a, &sim, n_paths).unwrap();
            assert_eq!(self_dist.distance, 0.0, "triple {triple}: d(X,X)");

            let ab = strategy::strategy_metric(&a, &b, &sim, n_paths).unwrap();
            let ba = strategy::strategy_metric(&b, &a, &sim, n_paths).unwrap();
            assert_eq!(ab.distance, ba.distance, "triple {triple}: symmetry");
            assert_eq!(ab.std_error, ba.std_error, "triple {triple}: symmetry se");

            let bc = strategy::strategy_metric(&b, &c, &sim, n_paths).unwrap();
            let ac = strategy::strategy_metric(&a, &c, &sim, n_paths).unwrap();
            let slack = ac.distance - (ab.distance + bc.distance);
            let band = 3.0
                * (ab.std_error * ab.std_error
                    + bc.std_error * bc.std_error
                    + ac.std_error * ac.std_error)
                    .sqrt();
            assert!(
                slack <= band,
                "triple {triple}: triangle violated by {slack:e} (band {band:e})"
            );
        }
    });
}

#[test]
fn criterion_11_lambert_branch_residuals() {
    criterion(11, "principal Lambert branch residuals", || {
        let lo = 1e-6f64.ln();
        let hi = (1e6 + (-1.0f64).exp()).ln();
        for i in 0..1000 {
            let u = lo + (hi - lo) * i as f64 / 999.0;
            let z = -(-1.0f64).exp() + u.exp();
            let w = lambert_w0(z).unwrap();
            let residual = (w * w.exp() - z).abs();
            assert!(
                residual < 1e-12 * z.abs().max(1.0),
                "z = {z:e}: residual {residual:e}"
            );
        }
    });
}

#[test]
fn criterion_12_determinism_across_threads() {
    criterion(12, "byte-identical reruns", || {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("experiment.ini");
        std::fs::write(
            &config_path,
            "[model]\nsigma = 0.25\neta = 0.4\nrbar = -0.3\nmu = 0.05\nlambda = 0.3\nd0 = 0.1\n\
             [experiment]\nkind = solve\npaths = 2000\nsteps = 250\nseed = 42\n",
        )
        .unwrap();
        let run = |threads: &str, sub: &str| {
            let out = dir.path().join(format!("out-{threads}"));
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_optexec"))
                .args([
                    "run",
                    "--config",
                    config_path.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                    "--threads",
                    threads,
                ])
                .status()
                .unwrap();
            assert!(status.success(), "run with --threads {threads} failed");
            std::fs::read(out.join(sub)).unwrap()
        };
        let csv_1 = run("1", "results.csv");
        let csv_3 = run("3", "results.csv");
        let csv_8 = run("8", "results.csv");
        assert_eq!(csv_1, csv_3, "results.csv differs between 1 and 3 threads");
        assert_eq!(csv_3, csv_8, "results.csv differs between 3 and 8 threads");
        let series_1 = std::fs::read(dir.path().join("out-1").join("series.json")).unwrap();
        let series_8 = std::fs::read(dir.path().join("out-8").join("series.json")).unwrap();
        assert_eq!(
            series_1, series_8,
            "series.json differs across thread counts"
        );
    });
}
