//! Command-line front end: run experiments from a config file, validate
//! model/target moments, and list the built-in example presets.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optexec::closed_form::ExampleKind;
use optexec::config::{ExperimentConfig, ExperimentKind, Overrides};
use optexec::report::{error_record, exit_code, write_error_json};
use optexec::runner;

#[derive(Parser)]
#[command(
    name = "optexec",
    about = "Optimal trade execution experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run(RunArgs),
    /// Monte-Carlo moment checks for the configured strategy and targets.
    Validate(RunArgs),
    /// List the built-in example presets.
    ListExamples,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured Monte-Carlo path count.
    #[arg(long)]
    paths: Option<u64>,
    /// Override the configured time-step count.
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory; falls back to the config's [output] dir, then
    /// $OPTEXEC_OUT, then ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = automatic). Results are invariant to this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExamples => {
            for kind in ExampleKind::all() {
                println!("{:<22} {}", kind.name(), kind.describe());
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => dispatch(args, None),
        Command::Validate(args) => dispatch(args, Some(ExperimentKind::Validate)),
    }
}

fn dispatch(args: RunArgs, forced_kind: Option<ExperimentKind>) -> ExitCode {
    let overrides = Overrides {
        seed: args.seed,
        paths: args.paths,
        steps: args.steps,
        kind: forced_kind,
    };
    let cfg = match ExperimentConfig::from_file(&args.config, &overrides) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("{}", error_record(&err));
            return code(&err);
        }
    };
    let out_dir = args
        .out
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("OPTEXEC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let run = if args.threads > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
        {
            Ok(pool) => pool.install(|| runner::run_to_dir(&cfg, &out_dir)),
            Err(e) => {
                let err = optexec::Error::config(format!("thread pool: {e}"));
                eprintln!("{}", error_record(&err));
                return code(&err);
            }
        }
    } else {
        runner::run_to_dir(&cfg, &out_dir)
    };

    match run {
        Ok(output) => {
            for check in &output.checks {
                let verdict = if check.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {} = {:.6e}", check.name, check.value);
            }
            println!(
                "wrote {} result rows to {}",
                output.records.len(),
                out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", error_record(&err));
            let _ = write_error_json(&out_dir, &err);
            code(&err)
        }
    }
}

fn code(err: &optexec::Error) -> ExitCode {
    ExitCode::from(exit_code(err).clamp(0, 255) as u8)
}
