use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use qsa_core::fmt::{sig, sig12};
use qsa_core::gibbs::gibbs_distribution;
use qsa_core::statevector::prepare_tour_superposition;
use qsa_core::tours::tour_distance;
use serde::Serialize;
use serde_json::json;

use crate::args::{Format, SampleArgs};
use crate::output::emit;

#[derive(Debug, Serialize)]
struct Row {
    tour: String,
    count: u64,
    empirical: f64,
    analytic: f64,
}

pub fn run(args: &SampleArgs, format: Format) -> Result<ExitCode> {
    if args.shots == 0 {
        bail!("--shots must be at least 1");
    }
    let inst = args.source.load()?;
    let n = inst.n();
    let backend = args.backend.resolve(n);
    let mut state = prepare_tour_superposition(n, backend)?;
    state.apply_bias_gates(&inst)?;
    let projection = state.project_valid()?;
    let table = state.outcome_table()?;
    let dist = gibbs_distribution(&inst)?;
    let analytic = dist.probabilities();

    let seed = args.source.seed;
    let indices = table.sample_indices(seed, args.shots);
    let mut counts = vec![0u64; analytic.len()];
    for &i in &indices {
        counts[table.tours()[i].rank()] += 1;
    }
    let shots = args.shots as f64;
    let max_deviation = counts
        .iter()
        .zip(analytic)
        .map(|(&c, &p)| (c as f64 / shots - p).abs())
        .fold(0.0f64, f64::max);

    // Only observed tours are listed; the deviation covers every tour.
    let rows: Vec<Row> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(rank, &c)| {
            Ok(Row {
                tour: qsa_core::Tour::unrank(n, rank)?.to_string(),
                count: c,
                empirical: c as f64 / shots,
                analytic: analytic[rank],
            })
        })
        .collect::<Result<_>>()?;

    if let Some(path) = &args.log {
        let mut log = String::new();
        let mut best = f64::INFINITY;
        for (t, &i) in indices.iter().enumerate() {
            let tour = &table.tours()[i];
            let d = tour_distance(&inst, tour)?;
            best = best.min(d);
            let _ = writeln!(log, "t={} ok=1 tour={tour} D={} best={}", t + 1, sig12(d), sig12(best));
        }
        std::fs::write(path, log).with_context(|| format!("writing {}", path.display()))?;
    }

    let mut text = format!(
        "n = {n}, backend = {:?}, shots = {}, seed = {seed}, post-selection success {}\n\n",
        backend,
        args.shots,
        sig(projection.success_probability, 6)
    );
    text.push_str("tour  count  empirical  analytic\n");
    for r in &rows {
        text.push_str(&format!(
            "{} {} {} {}\n",
            r.tour,
            r.count,
            sig(r.empirical, 6),
            sig(r.analytic, 6)
        ));
    }
    text.push_str(&format!("\nmax |empirical - analytic| = {}\n", sig(max_deviation, 6)));

    let doc = json!({
        "command": "sample",
        "n": n,
        "alpha": inst.alpha(),
        "backend": backend,
        "seed": seed,
        "shots": args.shots,
        "projection": projection,
        "rows": rows,
        "max_deviation": max_deviation,
    });
    emit(format, &text, doc)?;
    Ok(ExitCode::SUCCESS)
}
