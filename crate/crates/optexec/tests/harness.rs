//! End-to-end checks of the run/validate operations through the config layer,
//! plus CLI error reporting.

use std::process::Command;

use optexec::config::{ExperimentConfig, Overrides};
use optexec::report::ResultRecord;
use optexec::runner;

fn load(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_text(text, &Overrides::default()).unwrap()
}

fn row<'a>(records: &'a [ResultRecord], metric: &str) -> &'a ResultRecord {
    records
        .iter()
        .find(|r| r.metric == metric)
        .unwrap_or_else(|| panic!("missing metric {metric}"))
}

#[test]
fn validate_second_moment_of_a_driver_target_tracks_the_impact_mean() {
    // xi = W^3_T under constant gamma: E[gamma_T xi^2] = gamma0 * T.
    let cfg = load(
        "[model]\n\
         gamma0 = 1.0\nrho = 1.0\nx0 = 0.0\nd0 = 0.0\nhorizon = 1.0\n\
         [targets]\n\
         xi_w3 = 1.0\n\
         [experiment]\n\
         kind = validate\nstrategy = no-trade\npaths = 4000\nsteps = 400\nseed = 11\n",
    );
    let out = runner::execute(&cfg).unwrap();
    let r = row(&out.records, "target_second_moment");
    let expected = 1.0;
    assert!(r.std_error > 0.0, "driver target must have sampling noise");
    assert!(
        (r.value - expected).abs() < 3.0 * r.std_error,
        "E[gamma_T xi^2] = {} +- {} vs {}",
        r.value,
        r.std_error,
        expected
    );
    let finite = row(&out.records, "target_second_moment_finite");
    assert_eq!(finite.value, 1.0);
}

#[test]
fn validate_no_trade_deviation_matches_the_analytic_integral() {
    // No trading from d0 != 0: E int D^2 / (nu^2 gamma) ds has the closed form
    // d0^2 (1 - exp(-2 rho T)) / (2 rho gamma0) when all coefficients are constant.
    // The integrand is path-independent here, so the MC standard error is exactly
    // zero and the comparison needs an explicit discretization allowance: the
    // left-point sum has first-order bias ~ rho * dt (2.5e-3 relative covers n=500).
    let cfg = load(
        "[model]\n\
         gamma0 = 1.5\nrho = 0.9\nx0 = 0.0\nd0 = 0.5\nhorizon = 1.0\n\
         [experiment]\n\
         kind = validate\nstrategy = no-trade\npaths = 64\nsteps = 500\nseed = 3\n",
    );
    let out = runner::execute(&cfg).unwrap();
    let r = row(&out.records, "deviation_second_moment");
    let (d0, rho, gamma0, horizon) = (0.5f64, 0.9f64, 1.5f64, 1.0f64);
    let expected = d0 * d0 * (1.0 - (-2.0 * rho * horizon).exp()) / (2.0 * rho * gamma0);
    assert_eq!(r.std_error, 0.0);
    assert!(
        (r.value - expected).abs() < 3.0 * r.std_error + 2.5e-3 * expected,
        "no-trade deviation moment {} vs {}",
        r.value,
        expected
    );
}

#[test]
fn compare_rows_exceed_the_optimal_row_by_two_combined_errors() {
    let cfg = load(
        "[model]\n\
         gamma0 = 1.0\nrho = 1.0\nx0 = 1.0\nd0 = 0.0\nhorizon = 1.0\n\
         [experiment]\n\
         kind = compare\npaths = 64\nsteps = 400\nseed = 9\nepsilon = 0.05\n",
    );
    let out = runner::execute(&cfg).unwrap();
    let opt = row(&out.records, "cost_optimal");
    let rivals = [
        "cost_twap",
        "cost_block_initial",
        "cost_block_terminal",
        "cost_bump",
        "cost_tilt",
    ];
    for name in rivals {
        let r = row(&out.records, name);
        let combined = (r.std_error.powi(2) + opt.std_error.powi(2)).sqrt();
        assert!(
            r.value - opt.value > 2.0 * combined,
            "{name}: {} vs optimal {} (combined se {combined})",
            r.value,
            opt.value
        );
    }
}

#[test]
fn rerunning_the_same_config_reproduces_identical_bytes() {
    let text = "[model]\n\
                gamma0 = 2.0\nmu = 0.05\nsigma = 0.25\nrho = 1.1\neta = 0.4\nrbar = -0.3\n\
                lambda = 0.3\nx0 = 1.0\nd0 = 0.1\nhorizon = 1.0\n\
                [experiment]\n\
                kind = solve\npaths = 500\nsteps = 200\nseed = 42\n";
    let cfg = load(text);
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    runner::run_to_dir(&cfg, dir_a.path()).unwrap();
    runner::run_to_dir(&load(text), dir_b.path()).unwrap();
    for name in ["results.csv", "series.json"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}

#[test]
fn cli_rejects_a_malformed_config_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "[model]\ngamma0 = 1.0\nwobble = 3\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_optexec"))
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("\"error\":\"config\""), "stderr: {stderr}");
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn cli_lists_the_example_families() {
    let out = Command::new(env!("CARGO_BIN_EXE_optexec"))
        .arg("list-examples")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in [
        "ow",
        "ow-random-target",
        "rough-drift",
        "diffusive-resilience",
        "noise-cancellation",
    ] {
        assert!(
            stdout
                .lines()
                .any(|l| l.split_whitespace().next() == Some(name)),
            "missing example {name} in:\n{stdout}"
        );
    }
}
