//! Command-line flags, configuration files and their merge.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::Value;

use super::output::{nums, Obj};
use crate::error::{Result, RiskError};
use crate::utility::UtilityFunction;

#[derive(Debug, Parser)]
#[command(name = "tailrisk", version, about = "Tail quasi-linear means and entropic tail risk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// VaR, CTE, tail variance and tail quasi-linear means per level and utility.
    Measure(Flags),
    /// Level x gamma grid as a plot-ready table.
    Sweep(Flags),
    /// Contributions of joint scenario columns to the tail of their sum.
    Allocate(Flags),
    /// Optimal stop-loss retention for a premium budget.
    Reinsure(Flags),
    /// Minimal-risk weights of an elliptical portfolio.
    Portfolio(Flags),
    /// Quick invariant suite.
    Selftest(Flags),
    /// Draw a seeded sample from a model into a `loss` CSV.
    Sample(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Measure(_) => "measure",
            Command::Sweep(_) => "sweep",
            Command::Allocate(_) => "allocate",
            Command::Reinsure(_) => "reinsure",
            Command::Portfolio(_) => "portfolio",
            Command::Selftest(_) => "selftest",
            Command::Sample(_) => "sample",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Measure(f)
            | Command::Sweep(f)
            | Command::Allocate(f)
            | Command::Reinsure(f)
            | Command::Portfolio(f)
            | Command::Selftest(f)
            | Command::Sample(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// TOML or JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model specification, e.g. `normal(0,1)`, `t(5,0,1)`, `logistic(0,1)`.
    #[arg(long)]
    pub model: Option<String>,
    /// CSV input with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Vec<f64>,
    /// Utility specification: `linear`, `exp:g`, `pow:g`, `log`, `cap:c`.
    #[arg(long, value_delimiter = ',')]
    pub utility: Vec<String>,
    /// Premium loading.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Premium budget.
    #[arg(long, allow_negative_numbers = true)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo draws; switches model input to empirical mode.
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Elliptical generator for `portfolio`: `normal`, `logistic`, `t(m)`.
    #[arg(long)]
    pub generator: Option<String>,
    /// Batches for the allocation-gap standard error.
    #[arg(long)]
    pub batches: Option<usize>,
    /// Premium-matched proportional candidates for `reinsure`.
    #[arg(long)]
    pub candidates: Option<usize>,
    /// Report wall time (makes output nondeterministic).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    input: Option<PathBuf>,
    alpha: Option<OneOrMany<f64>>,
    gamma: Option<OneOrMany<f64>>,
    utility: Option<OneOrMany<String>>,
    theta: Option<f64>,
    budget: Option<f64>,
    seed: Option<u64>,
    paths: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
    generator: Option<String>,
    batches: Option<usize>,
    candidates: Option<usize>,
    mu: Option<Vec<f64>>,
    sigma: Option<Vec<Vec<f64>>>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| RiskError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| RiskError::Parse(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| RiskError::Parse(format!("{}: {e}", path.display())))
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub model: Option<String>,
    pub input: Option<PathBuf>,
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub utilities: Vec<UtilityFunction>,
    pub theta: Option<f64>,
    pub budget: Option<f64>,
    pub seed: u64,
    pub paths: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub generator: Option<String>,
    pub batches: usize,
    pub candidates: usize,
    pub mu: Option<Vec<f64>>,
    pub sigma: Option<Vec<Vec<f64>>>,
    pub timing: bool,
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn pick_list<T>(flag: Vec<T>, file: Option<OneOrMany<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.map(OneOrMany::into_vec).unwrap_or_default()
    } else {
        flag
    }
}

impl RunConfig {
    pub fn resolve(command: &Command) -> Result<Self> {
        let flags = command.flags().clone();
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let alphas = pick_list(flags.alpha, file.alpha);
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(RiskError::Parse(format!("level {a} is outside (0, 1)")));
        }
        let gammas = pick_list(flags.gamma, file.gamma);
        if let Some(g) = gammas.iter().find(|g| !g.is_finite()) {
            return Err(RiskError::Parse(format!("gamma {g} is not finite")));
        }
        let utilities = pick_list(flags.utility, file.utility)
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<UtilityFunction>>>()?;
        let default_format = if command.name() == "sweep" {
            Format::Csv
        } else {
            Format::Json
        };
        Ok(Self {
            command: command.name(),
            model: pick(flags.model, file.model),
            input: pick(flags.input, file.input),
            alphas,
            gammas,
            utilities,
            theta: pick(flags.theta, file.theta),
            budget: pick(flags.budget, file.budget),
            seed: pick(flags.seed, file.seed).unwrap_or(0),
            paths: pick(flags.paths, file.paths),
            format: pick(flags.format, file.format).unwrap_or(default_format),
            out: pick(flags.out, file.out),
            generator: pick(flags.generator, file.generator),
            batches: pick(flags.batches, file.batches).unwrap_or(20),
            candidates: pick(flags.candidates, file.candidates).unwrap_or(10),
            mu: file.mu,
            sigma: file.sigma,
            timing: flags.timing,
        })
    }

    /// Levels, defaulting to 0.95.
    pub fn levels(&self) -> Vec<f64> {
        if self.alphas.is_empty() {
            vec![0.95]
        } else {
            self.alphas.clone()
        }
    }

    /// `--utility` entries followed by `exp:g` for each `--gamma` (`linear`
    /// for zero); `linear` when both are empty.
    pub fn utility_list(&self) -> Result<Vec<UtilityFunction>> {
        let mut out = self.utilities.clone();
        for &g in &self.gammas {
            out.push(gamma_utility(g)?);
        }
        if out.is_empty() {
            out.push(UtilityFunction::Linear);
        }
        Ok(out)
    }

    pub fn echo(&self) -> Value {
        let path = |p: &Option<PathBuf>| -> Value {
            p.as_ref().map(|p| Value::from(p.display().to_string())).unwrap_or(Value::Null)
        };
        let opt = |x: Option<f64>| x.map(super::output::num).unwrap_or(Value::Null);
        Obj::new()
            .set("model", self.model.clone())
            .set("input", path(&self.input))
            .set("alpha", nums(&self.alphas))
            .set("gamma", nums(&self.gammas))
            .set(
                "utility",
                self.utilities.iter().map(|u| u.to_string()).collect::<Vec<_>>(),
            )
            .set("theta", opt(self.theta))
            .set("budget", opt(self.budget))
            .set("seed", self.seed)
            .set("paths", self.paths)
            .set("format", self.format.as_str())
            .set("generator", self.generator.clone())
            .set("batches", self.batches)
            .set("candidates", self.candidates)
            .into()
    }
}

pub fn gamma_utility(g: f64) -> Result<UtilityFunction> {
    if g == 0.0 {
        Ok(UtilityFunction::Linear)
    } else {
        UtilityFunction::exponential(g)
    }
}
