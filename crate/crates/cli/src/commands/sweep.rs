use std::process::ExitCode;

use anyhow::Result;
use qsa_core::fmt::sig;
use qsa_core::gibbs::gibbs_distribution;
use qsa_core::resources::{cp_from_distribution, estimate_from_distribution, validate_grid};
use serde::Serialize;
use serde_json::json;

use crate::args::{Format, SweepArgs};
use crate::output::{alpha_label, emit, opt};

#[derive(Debug, Serialize)]
struct Row {
    alpha: f64,
    z: f64,
    pr_optimal: f64,
    success_prob: f64,
    expected_repeats: f64,
    expected_repeats_to_optimum: f64,
    m_bits: Option<u32>,
    cp_satisfied: bool,
}

pub fn run(args: &SweepArgs, format: Format) -> Result<ExitCode> {
    let grid = &args.grid.0;
    validate_grid(grid)?;
    let base = args.source.load()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &alpha in grid {
        let inst = base.with_alpha(alpha)?;
        let dist = gibbs_distribution(&inst)?;
        let res = estimate_from_distribution(&inst, &dist)?;
        let cp = cp_from_distribution(&inst, &dist, args.source.k)?;
        rows.push(Row {
            alpha,
            z: dist.z(),
            pr_optimal: cp.pr_optimal,
            success_prob: res.success_prob,
            expected_repeats: res.expected_repeats,
            expected_repeats_to_optimum: res.expected_repeats_to_optimum,
            m_bits: res.m_bits,
            cp_satisfied: cp.satisfied,
        });
    }

    let mut text = format!(
        "# n = {}, k = {}\n# alpha Z P(optimal) success expected_repeats repeats_to_optimum m_bits cp\n",
        base.n(),
        sig(args.source.k, 6)
    );
    for r in &rows {
        text.push_str(&format!(
            "{} {} {} {} {} {} {} {}\n",
            alpha_label(r.alpha),
            sig(r.z, 6),
            sig(r.pr_optimal, 6),
            sig(r.success_prob, 6),
            sig(r.expected_repeats, 6),
            sig(r.expected_repeats_to_optimum, 6),
            opt(r.m_bits),
            if r.cp_satisfied { "yes" } else { "no" }
        ));
    }

    let doc = json!({
        "command": "sweep",
        "n": base.n(),
        "k": args.source.k,
        "rows": rows,
    });
    emit(format, &text, doc)?;
    Ok(ExitCode::SUCCESS)
}
