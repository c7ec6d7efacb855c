use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use qsa_core::instance::{parse_instance, random_instance};
use qsa_core::statevector::Backend;
use qsa_core::TspInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Increase log verbosity.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// Parses `e` or a number greater than 1.
pub fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let alpha = if s == "e" {
        std::f64::consts::E
    } else {
        s.parse::<f64>().map_err(|_| format!("`{s}` is not a number or `e`"))?
    };
    if alpha.is_finite() && alpha > 1.0 {
        Ok(alpha)
    } else {
        Err(format!("alpha must be > 1, got {s}"))
    }
}

#[derive(Debug, Clone)]
pub struct Grid(pub Vec<f64>);

/// Comma-separated alphas; each must parse, range checks happen later.
pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if t == "e" {
                Ok(std::f64::consts::E)
            } else {
                t.parse::<f64>().map_err(|_| format!("`{t}` is not a number or `e`"))
            }
        })
        .collect::<std::result::Result<_, _>>()
        .map(Grid)
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Bias base; anything other than e skips the reference-value checks.
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Instance file.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub instance: Option<PathBuf>,
    /// Random instance with N cities, generated from --seed.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
    /// Override the instance's bias base (`e` or a number > 1).
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Degree k of the polytime criterion Pr(optimal) >= n^-k.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
}

impl InstanceArgs {
    pub fn load(&self) -> Result<TspInstance> {
        let inst = match (&self.instance, self.random) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(n)) => random_instance(n, self.seed)?,
            _ => bail!("exactly one of --instance or --random is required"),
        };
        // Every analysis enumerates tours; fail early with the cap message.
        qsa_core::tours::enumerate_tours(inst.n())?;
        Ok(match self.alpha {
            Some(a) => inst.with_alpha(a)?,
            None => inst,
        })
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub source: InstanceArgs,
    #[arg(long, default_value_t = 100_000)]
    pub shots: usize,
    #[arg(long, value_parser = parse_backend, default_value = "auto")]
    pub backend: Backend,
    /// Write one run-log line per shot.
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
}

pub fn parse_backend(s: &str) -> std::result::Result<Backend, String> {
    s.parse().map_err(|e: qsa_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: InstanceArgs,
    /// Strictly increasing alphas, e.g. `e,4,8,16`.
    #[arg(long, value_parser = parse_grid, default_value = "e,4,8,16,32")]
    pub grid: Grid,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: InstanceArgs,
    /// Quantum trial budget per run (0 reports the method as censored).
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Metropolis step budget per run (0 reports the method as censored).
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,
    /// Number of runs, with seeds --seed, --seed + 1, ...
    #[arg(long, default_value_t = 30)]
    pub runs: u64,
    /// Metropolis schedule: `log:C`, `geo:BETA0,R` or `const:BETA`.
    #[arg(long, default_value = "log:1")]
    pub schedule: String,
}
