use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use qsa_core::anneal::{compare, CompareBudget, Schedule};
use serde_json::json;

use crate::args::{CompareArgs, Format};
use crate::output::emit;

/// `log:C`, `geo:BETA0,R` or `const:BETA`.
pub fn parse_schedule(s: &str) -> Result<Schedule> {
    let (kind, params) = s.split_once(':').ok_or_else(|| anyhow!("schedule `{s}` lacks `kind:`"))?;
    let values: Vec<f64> = params
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| anyhow!("bad schedule parameter `{v}`")))
        .collect::<Result<_>>()?;
    let schedule = match (kind, values.as_slice()) {
        ("log", &[c]) => Schedule::Logarithmic { c },
        ("geo", &[beta0, r]) => Schedule::Geometric { beta0, r },
        ("const", &[beta]) => Schedule::Constant { beta },
        _ => bail!("unknown schedule `{s}`; expected log:C, geo:BETA0,R or const:BETA"),
    };
    schedule.validate()?;
    Ok(schedule)
}

pub fn run(args: &CompareArgs, format: Format) -> Result<ExitCode> {
    let schedule = parse_schedule(&args.schedule)?;
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let inst = args.source.load()?;
    let budget = CompareBudget {
        quantum_trials: args.trials,
        metropolis_steps: args.steps,
        schedule,
    };
    let seeds: Vec<u64> = (0..args.runs).map(|i| args.source.seed.wrapping_add(i)).collect();
    let cmp = compare(&inst, &budget, &seeds)?;
    let doc = json!({
        "command": "compare",
        "n": inst.n(),
        "alpha": inst.alpha(),
        "budget": budget,
        "comparison": cmp,
    });
    emit(format, &cmp.to_text(), doc)?;
    Ok(ExitCode::SUCCESS)
}
