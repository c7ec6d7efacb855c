use std::process::ExitCode;

use anyhow::Result;
use qsa_core::fmt::sig;
use qsa_core::gibbs::{gibbs_distribution, z_bounds, TourEntry};
use qsa_core::resources::{
    cp_from_distribution, degeneracy_from_distribution, estimate_from_distribution, DEFAULT_EDGE_GAP_THRESHOLD,
    DEFAULT_TOUR_GAP_THRESHOLD,
};
use serde_json::json;

use crate::args::{Format, InstanceArgs};
use crate::output::{alpha_label, emit, opt};

const TOP: usize = 5;

pub fn run(args: &InstanceArgs, format: Format) -> Result<ExitCode> {
    let inst = args.load()?;
    let n = inst.n();
    let dist = gibbs_distribution(&inst)?;
    let bounds = z_bounds(n, inst.alpha())?;
    let within = bounds.contains_ln(dist.ln_z());
    let resources = estimate_from_distribution(&inst, &dist)?;
    let cp = cp_from_distribution(&inst, &dist, args.k)?;
    let degeneracy = degeneracy_from_distribution(&inst, &dist, DEFAULT_EDGE_GAP_THRESHOLD, DEFAULT_TOUR_GAP_THRESHOLD)?;

    let mut top: Vec<TourEntry> = dist.entries().collect();
    // Stable sort keeps rank order among equal probabilities.
    top.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    top.truncate(TOP);

    let mut text = format!(
        "n = {n}, alpha = {}, beta = {}\n\ntop tours:\n",
        alpha_label(inst.alpha()),
        sig(inst.beta(), 6)
    );
    for e in &top {
        text.push_str(&format!("  {} D={} P={}\n", e.tour, sig(e.distance, 6), sig(e.probability, 6)));
    }
    text.push_str(&format!("\nZ = {}\n", sig(dist.z(), 6)));
    text.push_str(&format!(
        "bounds: [{}, {}]\n",
        sig(bounds.lower(), 6),
        sig(bounds.upper(), 6)
    ));
    text.push_str(&format!(
        "Z within [(n−1)!/α^n, (n−1)!/α] : {}\n\n",
        if within { "yes" } else { "no" }
    ));
    text.push_str(&format!(
        "optimal distance {} ({} tours), P(optimal) = {}\n",
        sig(resources.optimal_distance, 6),
        resources.optimal_count,
        sig(cp.pr_optimal, 6)
    ));
    text.push_str(&format!(
        "post-selection success {}, expected repeats {}, repeats to optimum {}\n",
        sig(resources.success_prob, 6),
        sig(resources.expected_repeats, 6),
        sig(resources.expected_repeats_to_optimum, 6)
    ));
    text.push_str(&format!(
        "amplitude amplification repeats {}, energy scale {}, precision bits {}\n\n",
        resources.aa_repeats,
        sig(resources.energy_scale, 6),
        opt(resources.m_bits)
    ));
    text.push_str(&format!(
        "CP (k = {}): -ln Pr = {}, k ln n = {}\n",
        sig(cp.k, 6),
        sig(cp.neg_log_pr, 6),
        sig(cp.rhs, 6)
    ));
    text.push_str(&format!("CP satisfied: {}\n\n", if cp.satisfied { "yes" } else { "no" }));
    text.push_str(&format!(
        "min edge gap {} (ties: {}), min tour gap {}\n",
        sig(degeneracy.min_edge_gap, 6),
        if degeneracy.edge_ties { "yes" } else { "no" },
        opt(degeneracy.min_tour_gap.map(|g| sig(g, 6)))
    ));
    if degeneracy.precision_flag {
        text.push_str(&format!(
            "warning: edge gap below {}; precision estimate unreliable\n",
            degeneracy.edge_threshold
        ));
    }
    if degeneracy.tour_gap_flag {
        text.push_str(&format!(
            "warning: tour gap below {}; near-degenerate optimum\n",
            degeneracy.tour_threshold
        ));
    }

    let doc = json!({
        "command": "analyze",
        "n": n,
        "alpha": inst.alpha(),
        "beta": inst.beta(),
        "top_tours": top,
        "z": dist.z(),
        "z_bounds": bounds,
        "z_within_bounds": within,
        "resources": resources,
        "cp": cp,
        "degeneracy": degeneracy,
    });
    emit(format, &text, doc)?;
    Ok(ExitCode::SUCCESS)
}
