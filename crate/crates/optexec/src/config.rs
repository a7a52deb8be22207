//! Experiment configuration: a small sectioned key-value format, schema
//! checking, and a canonical hash so results stay tied to the exact inputs
//! that produced them.
//!
//! Files look like
//!
//! ```text
//! [model]
//! gamma0 = 1.0
//! rho    = 1.0
//!
//! [experiment]
//! kind  = solve
//! paths = 10000
//! ```
//!
//! Sections are `[model]`, `[targets]`, `[experiment]`, `[output]`; `#`
//! starts a comment; every key is checked against the schema and rejected
//! with its line number when unknown, duplicated, or malformed. All keys are
//! optional except `experiment.kind`. Keys that belong to a different
//! experiment kind than the configured one are rejected rather than ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::closed_form::{ExampleConfig, ExampleKind};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::{ModelSpec, RunningTarget, TargetSpec, TerminalTarget};

/// What the runner is asked to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Solve the optimal law, report its cost formula and a Monte-Carlo
    /// cross-check, and emit the K / theta / mean-path series.
    Solve,
    /// Solve, then price the optimal strategy against a family of fixed
    /// perturbations under common random numbers.
    Compare,
    /// Solve, then approximate the optimal control by finite-variation
    /// block strategies of increasing dyadic level.
    Approximate,
    /// Monte-Carlo moment checks for the configured strategy and targets.
    Validate,
    /// A named preset with a closed-form solution.
    Example,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Approximate => "approximate",
            ExperimentKind::Validate => "validate",
            ExperimentKind::Example => "example",
        }
    }

    fn from_name(name: &str) -> Option<ExperimentKind> {
        match name {
            "solve" => Some(ExperimentKind::Solve),
            "compare" => Some(ExperimentKind::Compare),
            "approximate" => Some(ExperimentKind::Approximate),
            "validate" => Some(ExperimentKind::Validate),
            "example" => Some(ExperimentKind::Example),
            _ => None,
        }
    }
}

/// Strategy evaluated by the validate experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    Optimal,
    Twap,
    NoTrade,
    CloseNow,
    HoldThenClose,
}

impl StrategyChoice {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyChoice::Optimal => "optimal",
            StrategyChoice::Twap => "twap",
            StrategyChoice::NoTrade => "no-trade",
            StrategyChoice::CloseNow => "close-now",
            StrategyChoice::HoldThenClose => "hold-then-close",
        }
    }

    fn from_name(name: &str) -> Option<StrategyChoice> {
        match name {
            "optimal" => Some(StrategyChoice::Optimal),
            "twap" => Some(StrategyChoice::Twap),
            "no-trade" => Some(StrategyChoice::NoTrade),
            "close-now" => Some(StrategyChoice::CloseNow),
            "hold-then-close" => Some(StrategyChoice::HoldThenClose),
            _ => None,
        }
    }
}

/// Running-target choice for the non-example kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaChoice {
    Zero,
    Const(f64),
    /// zeta_s = E_s[xi].
    ExpectedTarget,
}

impl ZetaChoice {
    fn canonical(&self) -> String {
        match self {
            ZetaChoice::Zero => "zero".into(),
            ZetaChoice::Const(v) => format!("const:{v}"),
            ZetaChoice::ExpectedTarget => "expected_target".into(),
        }
    }

    fn to_running(self) -> RunningTarget {
        match self {
            ZetaChoice::Zero => RunningTarget::Zero,
            ZetaChoice::Const(v) => RunningTarget::Deterministic(Coefficient::constant(v)),
            ZetaChoice::ExpectedTarget => RunningTarget::ExpectedTerminal,
        }
    }
}

/// A fully resolved experiment description. Every field is the effective
/// value after defaults and command-line overrides; the canonical hash and
/// all emitted numbers are functions of this struct alone.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    // model
    pub gamma0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub rho: f64,
    pub eta: f64,
    pub rbar: f64,
    pub lambda: f64,
    pub x0: f64,
    pub d0: f64,
    pub horizon: f64,
    // targets
    pub xi_mean: f64,
    pub xi_w3: f64,
    pub zeta: ZetaChoice,
    // experiment
    pub n_paths: u64,
    pub n_steps: usize,
    pub seed: u64,
    pub example: Option<ExampleKind>,
    pub strategy: StrategyChoice,
    pub epsilon: f64,
    pub max_level: u32,
    // output (not part of the canonical hash)
    pub out_dir: Option<PathBuf>,
}

const SECTIONS: [&str; 4] = ["model", "targets", "experiment", "output"];
const MODEL_KEYS: [&str; 10] = [
    "gamma0", "mu", "sigma", "rho", "eta", "rbar", "lambda", "x0", "d0", "horizon",
];
const TARGET_KEYS: [&str; 3] = ["xi_mean", "xi_w3", "zeta"];
const EXPERIMENT_KEYS: [&str; 8] = [
    "kind",
    "paths",
    "steps",
    "seed",
    "example",
    "strategy",
    "epsilon",
    "max_level",
];
const OUTPUT_KEYS: [&str; 1] = ["dir"];

/// Example presets fix the dynamics; only these model keys may be set.
const EXAMPLE_MODEL_KEYS: [&str; 5] = ["gamma0", "rho", "x0", "d0", "horizon"];

struct RawConfig {
    /// (section, key) -> (line number, value text).
    entries: BTreeMap<(String, String), (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<RawConfig> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::config(format!("line {line_no}: unterminated section header"))
                })?;
                if !SECTIONS.contains(&name) {
                    return Err(Error::config(format!(
                        "line {line_no}: unknown section '[{name}]'; expected one of {}",
                        SECTIONS.map(|s| format!("[{s}]")).join(", ")
                    )));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!(
                    "line {line_no}: expected 'key = value' or a section header, got '{line}'"
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let Some(section) = section.clone() else {
                return Err(Error::config(format!(
                    "line {line_no}: key '{key}' appears before any section header"
                )));
            };
            let allowed: &[&str] = match section.as_str() {
                "model" => &MODEL_KEYS,
                "targets" => &TARGET_KEYS,
                "experiment" => &EXPERIMENT_KEYS,
                "output" => &OUTPUT_KEYS,
                _ => unreachable!(),
            };
            if !allowed.contains(&key.as_str()) {
                return Err(Error::config(format!(
                    "line {line_no}: unknown key '{key}' in [{section}]; expected one of {}",
                    allowed.join(", ")
                )));
            }
            if let Some((first, _)) =
                entries.insert((section.clone(), key.clone()), (line_no, value))
            {
                return Err(Error::config(format!(
                    "line {line_no}: duplicate key '{key}' in [{section}] (first set on line {first})"
                )));
            }
        }
        Ok(RawConfig { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    fn float(&mut self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.take(section, key) {
            None => Ok(default),
            Some((line, text)) => {
                let v: f64 = text.parse().map_err(|_| {
                    Error::config(format!(
                        "line {line}: {section}.{key}: not a number: '{text}'"
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::config(format!(
                        "line {line}: {section}.{key}: must be finite"
                    )));
                }
                Ok(v)
            }
        }
    }

    fn integer(&mut self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.take(section, key) {
            None => Ok(default),
            Some((line, text)) => text.parse().map_err(|_| {
                Error::config(format!(
                    "line {line}: {section}.{key}: not a non-negative integer: '{text}'"
                ))
            }),
        }
    }

    fn reject_leftovers(&self) -> Result<()> {
        if let Some(((section, key), (line, _))) = self.entries.iter().next() {
            return Err(Error::config(format!(
                "line {line}: key '{key}' in [{section}] does not apply to this experiment kind"
            )));
        }
        Ok(())
    }
}

fn example_from_alias(raw: &str) -> Result<ExampleKind> {
    let norm = raw.replace('_', "-");
    let norm = if norm == "ow-deterministic" {
        "ow"
    } else {
        norm.as_str()
    };
    ExampleKind::from_name(norm)
}

impl ExperimentConfig {
    /// Parses and resolves `text`, applying command-line overrides for seed,
    /// path count, and step count before anything is derived from them.
    pub fn from_text(text: &str, overrides: &Overrides) -> Result<ExperimentConfig> {
        let mut raw = RawConfig::parse(text)?;

        let kind = match raw.take("experiment", "kind") {
            None => return Err(Error::config("experiment.kind is required")),
            Some((line, text)) => ExperimentKind::from_name(&text).ok_or_else(|| {
                Error::config(format!(
                    "line {line}: unknown experiment kind '{text}'; expected solve, compare, \
                     approximate, validate, or example"
                ))
            })?,
        };
        let kind = overrides.kind.unwrap_or(kind);

        let example = match raw.take("experiment", "example") {
            Some((line, text)) if kind == ExperimentKind::Example => {
                Some(example_from_alias(&text).map_err(|e| match e {
                    Error::Config(msg) => Error::config(format!("line {line}: {msg}")),
                    other => other,
                })?)
            }
            Some((line, _)) => {
                return Err(Error::config(format!(
                    "line {line}: experiment.example only applies when kind = example"
                )))
            }
            None if kind == ExperimentKind::Example => {
                return Err(Error::config(
                    "experiment.example is required when kind = example",
                ))
            }
            None => None,
        };

        // Example presets own the dynamics and the targets.
        if kind == ExperimentKind::Example {
            for key in MODEL_KEYS {
                if !EXAMPLE_MODEL_KEYS.contains(&key) {
                    if let Some((line, _)) = raw.take("model", key) {
                        return Err(Error::config(format!(
                            "line {line}: model.{key} is fixed by the example preset; \
                             only {} may be set",
                            EXAMPLE_MODEL_KEYS.join(", ")
                        )));
                    }
                }
            }
            for key in TARGET_KEYS {
                if let Some((line, _)) = raw.take("targets", key) {
                    return Err(Error::config(format!(
                        "line {line}: targets.{key} is fixed by the example preset"
                    )));
                }
            }
        }

        let preset = ExampleKind::OwDeterministic; // placeholder for defaults below
        let defaults = if kind == ExperimentKind::Example {
            ExampleConfig::new(example.unwrap_or(preset), 1)
        } else {
            ExampleConfig {
                kind: preset,
                n_steps: 1,
                x0: 1.0,
                d0: 0.0,
                gamma0: 1.0,
                rho: 1.0,
                horizon: 1.0,
            }
        };

        let gamma0 = raw.float("model", "gamma0", defaults.gamma0)?;
        let mu = raw.float("model", "mu", 0.0)?;
        let sigma = raw.float("model", "sigma", 0.0)?;
        let rho = raw.float("model", "rho", defaults.rho)?;
        let eta = raw.float("model", "eta", 0.0)?;
        let rbar = raw.float("model", "rbar", 0.0)?;
        let lambda = raw.float("model", "lambda", 0.0)?;
        let x0 = raw.float("model", "x0", defaults.x0)?;
        let d0 = raw.float("model", "d0", defaults.d0)?;
        let horizon = raw.float("model", "horizon", defaults.horizon)?;

        let xi_mean = raw.float("targets", "xi_mean", 0.0)?;
        let xi_w3 = raw.float("targets", "xi_w3", 0.0)?;
        let zeta = match raw.take("targets", "zeta") {
            None => ZetaChoice::Zero,
            Some((line, text)) => match text.as_str() {
                "zero" => ZetaChoice::Zero,
                "expected_target" => ZetaChoice::ExpectedTarget,
                other => match other.strip_prefix("const:") {
                    Some(num) => ZetaChoice::Const(num.trim().parse().map_err(|_| {
                        Error::config(format!(
                            "line {line}: targets.zeta: not a number after 'const:': '{num}'"
                        ))
                    })?),
                    None => {
                        return Err(Error::config(format!(
                            "line {line}: targets.zeta: expected zero, const:<value>, \
                             or expected_target, got '{other}'"
                        )))
                    }
                },
            },
        };

        let n_paths = raw.integer("experiment", "paths", 10_000)?;
        let n_steps = raw.integer("experiment", "steps", 1_000)? as usize;
        let seed = raw.integer("experiment", "seed", 1)?;

        let strategy = match raw.take("experiment", "strategy") {
            Some((line, text)) if kind == ExperimentKind::Validate => {
                StrategyChoice::from_name(&text).ok_or_else(|| {
                    Error::config(format!(
                        "line {line}: unknown strategy '{text}'; expected optimal, twap, \
                         no-trade, close-now, or hold-then-close"
                    ))
                })?
            }
            Some((line, _)) => {
                return Err(Error::config(format!(
                    "line {line}: experiment.strategy only applies when kind = validate"
                )))
            }
            None => StrategyChoice::NoTrade,
        };

        let epsilon = if kind == ExperimentKind::Compare {
            let eps = raw.float("experiment", "epsilon", 0.05)?;
            if eps <= 0.0 {
                return Err(Error::config("experiment.epsilon must be positive"));
            }
            eps
        } else if let Some((line, _)) = raw.take("experiment", "epsilon") {
            return Err(Error::config(format!(
                "line {line}: experiment.epsilon only applies when kind = compare"
            )));
        } else {
            0.05
        };

        let max_level = if kind == ExperimentKind::Approximate {
            let lvl = raw.integer("experiment", "max_level", 8)? as u32;
            if !(2..=14).contains(&lvl) {
                return Err(Error::config(
                    "experiment.max_level must be between 2 and 14",
                ));
            }
            lvl
        } else if let Some((line, _)) = raw.take("experiment", "max_level") {
            return Err(Error::config(format!(
                "line {line}: experiment.max_level only applies when kind = approximate"
            )));
        } else {
            8
        };

        let out_dir = raw.take("output", "dir").map(|(_, v)| PathBuf::from(v));
        raw.reject_leftovers()?;

        let mut cfg = ExperimentConfig {
            kind,
            gamma0,
            mu,
            sigma,
            rho,
            eta,
            rbar,
            lambda,
            x0,
            d0,
            horizon,
            xi_mean,
            xi_w3,
            zeta,
            n_paths,
            n_steps,
            seed,
            example,
            strategy,
            epsilon,
            max_level,
            out_dir,
        };
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(paths) = overrides.paths {
            cfg.n_paths = paths;
        }
        if let Some(steps) = overrides.steps {
            cfg.n_steps = steps;
        }
        if cfg.n_paths == 0 {
            return Err(Error::config("experiment.paths must be positive"));
        }
        if cfg.n_steps == 0 {
            return Err(Error::config("experiment.steps must be positive"));
        }
        cfg.model_spec()?; // surface model-level rejections at load time
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::from_text(&text, overrides)
    }

    /// The effective configuration as sorted `section.key=value` lines.
    /// Output settings and thread counts are excluded on purpose: they must
    /// not change any emitted number.
    pub fn canonical(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        let mut push = |s: String| lines.push(s);
        push(format!("experiment.kind={}", self.kind.name()));
        push(format!("experiment.paths={}", self.n_paths));
        push(format!("experiment.steps={}", self.n_steps));
        push(format!("experiment.seed={}", self.seed));
        match self.kind {
            ExperimentKind::Example => {
                push(format!(
                    "experiment.example={}",
                    self.example
                        .expect("example kind always has a preset")
                        .name()
                ));
            }
            ExperimentKind::Validate => {
                push(format!("experiment.strategy={}", self.strategy.name()));
            }
            ExperimentKind::Compare => {
                push(format!("experiment.epsilon={}", self.epsilon));
            }
            ExperimentKind::Approximate => {
                push(format!("experiment.max_level={}", self.max_level));
            }
            ExperimentKind::Solve => {}
        }
        push(format!("model.gamma0={}", self.gamma0));
        push(format!("model.rho={}", self.rho));
        push(format!("model.x0={}", self.x0));
        push(format!("model.d0={}", self.d0));
        push(format!("model.horizon={}", self.horizon));
        if self.kind != ExperimentKind::Example {
            push(format!("model.mu={}", self.mu));
            push(format!("model.sigma={}", self.sigma));
            push(format!("model.eta={}", self.eta));
            push(format!("model.rbar={}", self.rbar));
            push(format!("model.lambda={}", self.lambda));
            push(format!("targets.xi_mean={}", self.xi_mean));
            push(format!("targets.xi_w3={}", self.xi_w3));
            push(format!("targets.zeta={}", self.zeta.canonical()));
        }
        lines.sort();
        let mut out = String::new();
        for line in lines {
            let _ = writeln!(out, "{line}");
        }
        out
    }

    /// FNV-1a over the canonical form, as 16 hex digits.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.canonical().bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Short identifier used as the experiment id in result rows.
    pub fn experiment_id(&self) -> String {
        match self.kind {
            ExperimentKind::Example => format!(
                "example-{}",
                self.example
                    .expect("example kind always has a preset")
                    .name()
            ),
            other => other.name().to_string(),
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        if self.kind == ExperimentKind::Example {
            let cfg = ExampleConfig {
                kind: self.example.expect("example kind always has a preset"),
                n_steps: self.n_steps,
                x0: self.x0,
                d0: self.d0,
                gamma0: self.gamma0,
                rho: self.rho,
                horizon: self.horizon,
            };
            return cfg.model_spec();
        }
        let grid = TimeGrid::new(0.0, self.horizon, self.n_steps)?;
        let terminal = if self.xi_w3 == 0.0 {
            TerminalTarget::Const(self.xi_mean)
        } else {
            TerminalTarget::LinearInDriver {
                base: self.xi_mean,
                slope: self.xi_w3,
            }
        };
        let targets = TargetSpec {
            terminal,
            running: self.zeta.to_running(),
        };
        ModelSpec::with_constants(
            grid,
            self.gamma0,
            self.mu,
            self.sigma,
            self.rho,
            self.eta,
            self.rbar,
            self.lambda,
            targets,
            self.x0,
            self.d0,
        )
    }
}

/// Command-line overrides applied before the canonical hash is computed.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<u64>,
    pub steps: Option<usize>,
    /// Forces the experiment kind (the `validate` subcommand).
    pub kind: Option<ExperimentKind>,
}
