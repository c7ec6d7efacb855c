use std::process::ExitCode;

use anyhow::Result;
use qsa_core::gibbs::{gibbs_distribution, solution_probability};
use qsa_core::instance::four_city_example;
use qsa_core::resources::estimate_from_distribution;
use qsa_core::tours::{enumerate_tours, optimal_tours, tour_bias_product, tour_count, tour_distance};
use serde::Serialize;
use serde_json::json;

use crate::args::{DemoArgs, Format};
use crate::output::{alpha_label, dot, emit};

const EDGES: [((usize, usize), f64); 6] = [
    ((0, 1), 0.4966),
    ((0, 2), 0.6065),
    ((0, 3), 0.3679),
    ((1, 2), 0.4493),
    ((1, 3), 0.5488),
    ((2, 3), 0.4066),
];
const PRODUCTS: [f64; 6] = [0.0334, 0.0672, 0.0550, 0.0672, 0.0550, 0.0334];
const PROBABILITIES: [f64; 6] = [0.1073, 0.2159, 0.1767, 0.2159, 0.1767, 0.1073];
const Z: f64 = 0.3112;
const SOLUTION: f64 = 0.43;
const UNBIASED: f64 = 0.33;

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    value: f64,
    reference: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn new(name: String, value: f64, reference: f64, tolerance: f64) -> Self {
        let pass = (value - reference).abs() <= tolerance;
        Check { name, value, reference, tolerance, pass }
    }
}

#[derive(Debug, Serialize)]
struct EdgeRow {
    edge: String,
    distance: f64,
    q: f64,
}

#[derive(Debug, Serialize)]
struct TourRow {
    tour: String,
    bias_product: f64,
    distance: f64,
    probability: f64,
}

pub fn run(args: &DemoArgs, format: Format) -> Result<ExitCode> {
    let base = four_city_example();
    let inst = match args.alpha {
        Some(a) => base.with_alpha(a)?,
        None => base,
    };
    let check_reference = inst.alpha() == std::f64::consts::E;

    let mut edges = Vec::new();
    for &((j, k), _) in &EDGES {
        edges.push(EdgeRow {
            edge: format!("{}{}", j + 1, k + 1),
            distance: inst.distance(j, k),
            q: inst.bias_of(j, k)?,
        });
    }
    let dist = gibbs_distribution(&inst)?;
    let mut tours = Vec::new();
    for (rank, t) in enumerate_tours(4)?.enumerate() {
        tours.push(TourRow {
            tour: t.to_string(),
            bias_product: tour_bias_product(&inst, &t)?,
            distance: tour_distance(&inst, &t)?,
            probability: dist.probabilities()[rank],
        });
    }
    let opt = optimal_tours(&inst)?;
    let solution = solution_probability(&dist, &opt.tours)?;
    let unbiased = opt.tours.len() as f64 / tour_count(4) as f64;
    let resources = estimate_from_distribution(&inst, &dist)?;

    let mut checks = Vec::new();
    if check_reference {
        for (row, &(_, want)) in edges.iter().zip(&EDGES) {
            checks.push(Check::new(format!("q{}", row.edge), row.q, want, 5e-5));
        }
        for (row, &want) in tours.iter().zip(&PRODUCTS) {
            checks.push(Check::new(format!("Πq {}", row.tour), row.bias_product, want, 5e-5));
        }
        checks.push(Check::new("Z".into(), dist.z(), Z, 5e-4));
        for (row, &want) in tours.iter().zip(&PROBABILITIES) {
            checks.push(Check::new(format!("P {}", row.tour), row.probability, want, 5e-4));
        }
        checks.push(Check::new("P(solution)".into(), solution, SOLUTION, 5e-3));
        checks.push(Check::new("P(solution) unbiased".into(), unbiased, UNBIASED, 5e-3));
    }
    let first_failure = checks.iter().find(|c| !c.pass).map(|c| c.name.clone());

    let mut text = String::new();
    text.push_str(&format!(
        "four-city example, alpha = {}, beta = {}\n\n",
        alpha_label(inst.alpha()),
        qsa_core::fmt::sig(inst.beta(), 6)
    ));
    text.push_str("edge  d    q\n");
    for row in &edges {
        text.push_str(&format!("{:<5} {:<4} {}\n", row.edge, dot(row.distance, 1), dot(row.q, 4)));
    }
    text.push('\n');
    for row in &tours {
        text.push_str(&format!(
            "{} Πq={} D={} P={}\n",
            row.tour,
            dot(row.bias_product, 4),
            dot(row.distance, 1),
            dot(row.probability, 4)
        ));
    }
    text.push_str(&format!("\nZ={}\n", dot(dist.z(), 4)));
    let names: Vec<String> = opt.tours.iter().map(|t| t.to_string()).collect();
    text.push_str(&format!("optimal tours: {} (D={})\n", names.join(", "), dot(opt.distance, 1)));
    text.push_str(&format!(
        "P(solution)={} biased vs {} unbiased\n\n",
        dot(solution, 2),
        dot(unbiased, 2)
    ));
    text.push_str(&format!(
        "post-selection success {}, expected repeats {}, repeats to optimum {}\n",
        qsa_core::fmt::sig(resources.success_prob, 4),
        qsa_core::fmt::sig(resources.expected_repeats, 4),
        qsa_core::fmt::sig(resources.expected_repeats_to_optimum, 4)
    ));
    text.push_str(&format!(
        "amplitude amplification repeats {}, energy scale {}, precision bits {}\n\n",
        resources.aa_repeats,
        qsa_core::fmt::sig(resources.energy_scale, 4),
        crate::output::opt(resources.m_bits)
    ));
    if check_reference {
        for c in &checks {
            text.push_str(&format!(
                "[{}] {} = {} (reference {}, tol {:e})\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                qsa_core::fmt::sig(c.value, 6),
                c.reference,
                c.tolerance
            ));
        }
        let passed = checks.iter().filter(|c| c.pass).count();
        text.push_str(&format!("{passed}/{} reference checks passed\n", checks.len()));
    } else {
        text.push_str("reference checks skipped: alpha overridden\n");
    }

    let doc = json!({
        "command": "demo",
        "alpha": inst.alpha(),
        "beta": inst.beta(),
        "edges": edges,
        "tours": tours,
        "z": dist.z(),
        "optimal_tours": names,
        "optimal_distance": opt.distance,
        "solution_probability": solution,
        "unbiased_probability": unbiased,
        "resources": resources,
        "checks_skipped": !check_reference,
        "checks": checks,
    });
    emit(format, &text, doc)?;

    Ok(match first_failure {
        Some(name) => {
            eprintln!("check failed: {name}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    })
}
