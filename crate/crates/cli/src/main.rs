//! `qsa`: command-line driver for the biased-measurement annealing simulator.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage or input error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{CompareArgs, DemoArgs, GlobalArgs, InstanceArgs, SampleArgs, SweepArgs};

#[derive(Debug, Parser)]
#[command(name = "qsa", version, about = "Exact simulation of quantum simulated annealing for the TSP")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the embedded four-city example and check it against reference values.
    Demo(DemoArgs),
    /// Distribution, bounds, resources, polytime criterion and degeneracy of an instance.
    Analyze(InstanceArgs),
    /// Measure the post-selected state and compare frequencies with the exact distribution.
    Sample(SampleArgs),
    /// Tabulate Z, P(optimal), success probability, repeats and precision over an alpha grid.
    Sweep(SweepArgs),
    /// Repeated-measurement annealing against Metropolis over several seeds.
    Compare(CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(match cli.global.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        })
        .init();
    if let Some(threads) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let format = cli.global.format;
    let result = match cli.command {
        Command::Demo(a) => commands::demo::run(&a, format),
        Command::Analyze(a) => commands::analyze::run(&a, format),
        Command::Sample(a) => commands::sample::run(&a, format),
        Command::Sweep(a) => commands::sweep::run(&a, format),
        Command::Compare(a) => commands::compare::run(&a, format),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
