//! Result serialization: results.csv rows, the series.json arrays, the run
//! manifest, and machine-readable error records.
//!
//! Every number in results.csv is printed with 17 significant digits so the
//! files are byte-stable across runs and thread counts; row order is
//! canonical (experiment id, then metric name) regardless of how the work
//! was scheduled.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One measured quantity, carrying enough metadata to re-run it alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment: String,
    pub config_hash: String,
    pub metric: String,
    pub value: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub seed: u64,
}

pub const RESULTS_HEADER: &str = "experiment,config_hash,metric,value,std_error,n_paths,seed";

/// The results.csv body: header plus one sorted row per record, LF endings.
pub fn render_results_csv(records: &[ResultRecord]) -> String {
    let mut sorted: Vec<&ResultRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (&a.experiment, &a.metric).cmp(&(&b.experiment, &b.metric)));
    let mut out = String::with_capacity(64 * (sorted.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{},{}",
            r.experiment, r.config_hash, r.metric, r.value, r.std_error, r.n_paths, r.seed
        );
    }
    out
}

pub fn write_results_csv(path: &Path, records: &[ResultRecord]) -> Result<()> {
    std::fs::write(path, render_results_csv(records))?;
    Ok(())
}

/// Plot-ready arrays on the time grid. Entries the experiment does not
/// produce stay empty; `times` has n+1 nodes while `k` and `theta` follow
/// the solver convention (values at every node).
#[derive(Debug, Clone, Default, Serialize)]
pub struct Series {
    pub times: Vec<f64>,
    pub k: Vec<f64>,
    pub theta: Vec<f64>,
    pub mean_xstar: Vec<f64>,
    pub cost_curve: Vec<f64>,
}

pub fn write_series_json(path: &Path, series: &Series) -> Result<()> {
    let mut text = serde_json::to_string_pretty(series)
        .map_err(|e| Error::config(format!("series serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Run-level metadata. Wall time lives here, not in results.csv, so the
/// result rows stay byte-identical across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub n_paths: u64,
    pub n_steps: usize,
    pub wall_time_seconds: f64,
}

pub fn write_manifest_json(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::config(format!("manifest serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Process exit code for an error, grouped by how the caller can react.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Unsupported(_) => 3,
        Error::Domain(_) | Error::Solver { .. } => 4,
        Error::Io(_) => 5,
    }
}

/// One-line JSON error record for stderr and error.json.
pub fn error_record(err: &Error) -> String {
    #[derive(Serialize)]
    struct Record<'a> {
        error: &'a str,
        message: String,
        exit_code: i32,
    }
    let kind = match err {
        Error::Config(_) => "config",
        Error::Unsupported(_) => "unsupported",
        Error::Domain(_) => "domain",
        Error::Solver { .. } => "solver",
        Error::Io(_) => "io",
    };
    serde_json::to_string(&Record {
        error: kind,
        message: err.to_string(),
        exit_code: exit_code(err),
    })
    .expect("plain strings and integers always serialize")
}

/// Best-effort error.json alongside the other outputs.
pub fn write_error_json(dir: &Path, err: &Error) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("error.json"), format!("{}\n", error_record(err)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(experiment: &str, metric: &str, value: f64) -> ResultRecord {
        ResultRecord {
            experiment: experiment.into(),
            config_hash: "00ff00ff00ff00ff".into(),
            metric: metric.into(),
            value,
            std_error: 0.5,
            n_paths: 100,
            seed: 7,
        }
    }

    #[test]
    fn csv_rows_are_sorted_and_bit_specified() {
        let rows = vec![
            record("solve", "b_metric", 1.0 / 3.0),
            record("solve", "a_metric", 2.0),
            record("compare", "z_metric", -0.25),
        ];
        let text = render_results_csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RESULTS_HEADER);
        assert_eq!(
            lines[1],
            "compare,00ff00ff00ff00ff,z_metric,-2.5000000000000000e-1,5.0000000000000000e-1,100,7"
        );
        assert!(lines[2].starts_with("solve,00ff00ff00ff00ff,a_metric,2.0000000000000000e0"));
        assert!(lines[3].starts_with("solve,00ff00ff00ff00ff,b_metric,3.3333333333333331e-1"));
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_rendering_is_deterministic_under_permutation() {
        let a = vec![
            record("x", "m1", 0.1),
            record("x", "m2", 0.2),
            record("y", "m1", 0.3),
        ];
        let b = vec![a[2].clone(), a[0].clone(), a[1].clone()];
        assert_eq!(render_results_csv(&a), render_results_csv(&b));
    }

    #[test]
    fn error_records_carry_kind_and_exit_code() {
        let err = Error::config("bad key");
        assert_eq!(exit_code(&err), 2);
        let rec = error_record(&err);
        assert!(rec.contains("\"error\":\"config\""), "{rec}");
        assert!(rec.contains("\"exit_code\":2"), "{rec}");

        let err = Error::unsupported("outside scope");
        assert_eq!(exit_code(&err), 3);
        let err = Error::solver(0.5, "lost positivity");
        assert_eq!(exit_code(&err), 4);
    }
}
