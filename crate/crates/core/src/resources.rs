//! Resource analysis: phase precision, post-selection cost, the polytime
//! criterion, and degeneracy diagnostics.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{gibbs_distribution, TourDistribution};
use crate::instance::TspInstance;
use crate::tours::{tour_count, Tour};

pub const DEFAULT_EDGE_GAP_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_TOUR_GAP_THRESHOLD: f64 = 1e-6;

/// Slack in `ln(Pr * n^k) >= 0` so exact-equality cases (e.g. `k = 0` on a
/// fully degenerate instance) are not lost to rounding.
const CP_LOG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionEstimate {
    /// Phase-resolution bits `m`, at least 1.
    pub bits: u32,
    /// The value `2^m` must reach: `pi * sqrt(alpha^d - 1) / (min_dd * ln alpha)`.
    pub target: f64,
    /// The target was below 2, so `bits` was clamped up to 1; the angle
    /// difference is below what one bit resolves.
    pub clamped: bool,
}

/// Bits needed so that rotation angles of legs whose distances differ by
/// `min_dd` are distinguishable: `m = ceil(log2(pi sqrt(alpha^d - 1) / (min_dd ln alpha)))`.
/// `d` defaults to the worst case 1.
pub fn precision_bits(alpha: f64, d: Option<f64>, min_dd: f64) -> Result<PrecisionEstimate> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be > 1, got {alpha}")));
    }
    let d = d.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::InvalidArgument(format!("leg distance must lie in (0, 1], got {d}")));
    }
    if !(min_dd > 0.0) {
        return Err(Error::DegenerateInstance(format!(
            "minimum distance gap {min_dd} makes the precision requirement diverge"
        )));
    }
    let target = PI * (alpha.powf(d) - 1.0).sqrt() / (min_dd * alpha.ln());
    let raw = target.log2().ceil();
    let clamped = !(raw >= 1.0);
    let bits = if clamped { 1 } else { raw as u32 };
    Ok(PrecisionEstimate {
        bits,
        target,
        clamped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceEstimate {
    pub n: usize,
    pub alpha: f64,
    /// `None` when two edges share a distance exactly.
    pub m_bits: Option<u32>,
    /// `Z / (n-1)!`.
    pub success_prob: f64,
    /// `1 / success_prob`.
    pub expected_repeats: f64,
    /// `(n-1)! / sum over optimal tours of alpha^(-D)`.
    pub expected_repeats_to_optimum: f64,
    /// `alpha^D` at the optimal distance.
    pub energy_scale: f64,
    /// `ceil(pi/4 * sqrt(expected_repeats_to_optimum))`.
    pub aa_repeats: u64,
    pub optimal_distance: f64,
    pub optimal_count: usize,
}

pub fn estimate_resources(inst: &TspInstance) -> Result<ResourceEstimate> {
    let dist = gibbs_distribution(inst)?;
    estimate_from_distribution(inst, &dist)
}

/// As [`estimate_resources`], reusing an already computed distribution.
pub fn estimate_from_distribution(
    inst: &TspInstance,
    dist: &TourDistribution,
) -> Result<ResourceEstimate> {
    check_same(inst, dist)?;
    let n = inst.n();
    let ln_count = ln_tour_count(n);
    let success_prob = (dist.ln_z() - ln_count).exp();
    let expected_repeats_to_optimum = (ln_count - dist.ln_optimal_weight()).exp();
    let gap = degeneracy_edge_gap(inst).0;
    let m_bits = if gap > 0.0 {
        Some(precision_bits(inst.alpha(), Some(1.0), gap)?.bits)
    } else {
        None
    };
    Ok(ResourceEstimate {
        n,
        alpha: inst.alpha(),
        m_bits,
        success_prob,
        expected_repeats: 1.0 / success_prob,
        expected_repeats_to_optimum,
        energy_scale: (inst.beta() * dist.min_distance()).exp(),
        aa_repeats: (PI / 4.0 * expected_repeats_to_optimum.sqrt()).ceil() as u64,
        optimal_distance: dist.min_distance(),
        optimal_count: dist.optimal_ranks().len(),
    })
}

fn check_same(inst: &TspInstance, dist: &TourDistribution) -> Result<()> {
    if inst.n() != dist.n() || inst.alpha() != dist.alpha() {
        return Err(Error::InvalidArgument(
            "distribution was computed for a different instance".into(),
        ));
    }
    Ok(())
}

pub(crate) fn ln_tour_count(n: usize) -> f64 {
    (2..n).map(|k| (k as f64).ln()).sum()
}

/// Polytime criterion at degree `k`: the optimum is seen with probability at
/// least `n^-k`.
///
/// Both sides are in distance units: `lhs = -log_alpha(sum of optimal
/// weights)` (the optimal distance when it is unique) and
/// `rhs = k log_alpha n - log_alpha Z`. The criterion holds iff `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpReport {
    pub n: usize,
    pub alpha: f64,
    pub k: f64,
    /// Probability of measuring any optimal tour.
    pub pr_optimal: f64,
    /// `-log_alpha pr_optimal`.
    pub neg_log_pr: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn cp_check(inst: &TspInstance, k: f64) -> Result<CpReport> {
    let dist = gibbs_distribution(inst)?;
    cp_from_distribution(inst, &dist, k)
}

pub fn cp_from_distribution(inst: &TspInstance, dist: &TourDistribution, k: f64) -> Result<CpReport> {
    check_same(inst, dist)?;
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::InvalidArgument(format!("degree k must be >= 0, got {k}")));
    }
    let beta = inst.beta();
    let ln_n = (inst.n() as f64).ln();
    let ln_opt = dist.ln_optimal_weight();
    let ln_pr = ln_opt - dist.ln_z();
    Ok(CpReport {
        n: inst.n(),
        alpha: inst.alpha(),
        k,
        pr_optimal: ln_pr.exp(),
        neg_log_pr: -ln_pr / beta,
        lhs: -ln_opt / beta,
        rhs: (k * ln_n - dist.ln_z()) / beta,
        satisfied: ln_pr + k * ln_n >= -CP_LOG_SLACK,
    })
}

/// [`cp_check`] at each `alpha` of a strictly increasing grid.
pub fn cp_sweep(inst: &TspInstance, alpha_grid: &[f64], k: f64) -> Result<Vec<CpReport>> {
    validate_grid(alpha_grid)?;
    alpha_grid
        .par_iter()
        .map(|&a| cp_check(&inst.with_alpha(a)?, k))
        .collect()
}

pub fn validate_grid(alpha_grid: &[f64]) -> Result<()> {
    if alpha_grid.is_empty() {
        return Err(Error::InvalidArgument("alpha grid is empty".into()));
    }
    if let Some(a) = alpha_grid.iter().find(|a| !(a.is_finite() && **a > 1.0)) {
        return Err(Error::InvalidArgument(format!("alpha must be > 1, got {a}")));
    }
    if alpha_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("alpha grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    /// Smallest difference between two edge distances; 0 when two edges tie.
    pub min_edge_gap: f64,
    pub edge_ties: bool,
    /// Distance from the best tour to the next-best one, tours and their
    /// reversals counted once. `None` for `n = 3` (a single undirected tour).
    pub min_tour_gap: Option<f64>,
    /// `min_edge_gap` is below the edge threshold.
    pub precision_flag: bool,
    /// `min_tour_gap` is below the tour threshold.
    pub tour_gap_flag: bool,
    pub edge_threshold: f64,
    pub tour_threshold: f64,
}

pub fn degeneracy_report(inst: &TspInstance) -> Result<DegeneracyReport> {
    degeneracy_report_with(inst, DEFAULT_EDGE_GAP_THRESHOLD, DEFAULT_TOUR_GAP_THRESHOLD)
}

pub fn degeneracy_report_with(
    inst: &TspInstance,
    edge_threshold: f64,
    tour_threshold: f64,
) -> Result<DegeneracyReport> {
    let dist = gibbs_distribution(inst)?;
    degeneracy_from_distribution(inst, &dist, edge_threshold, tour_threshold)
}

pub fn degeneracy_from_distribution(
    inst: &TspInstance,
    dist: &TourDistribution,
    edge_threshold: f64,
    tour_threshold: f64,
) -> Result<DegeneracyReport> {
    if dist.n() != inst.n() {
        return Err(Error::InvalidArgument(
            "distribution was computed for a different instance".into(),
        ));
    }
    let (min_edge_gap, edge_ties) = degeneracy_edge_gap(inst);

    // One representative per reversal pair.
    let n = inst.n();
    let mut classes: Vec<f64> = (0..tour_count(n))
        .filter_map(|rank| {
            let t = Tour::unrank(n, rank).ok()?;
            (rank <= t.reversed().rank()).then(|| dist.distances()[rank])
        })
        .collect();
    classes.sort_by(f64::total_cmp);
    let min_tour_gap = (classes.len() >= 2).then(|| (classes[1] - classes[0]).max(0.0));

    Ok(DegeneracyReport {
        min_edge_gap,
        edge_ties,
        min_tour_gap,
        precision_flag: min_edge_gap < edge_threshold,
        tour_gap_flag: min_tour_gap.is_some_and(|g| g < tour_threshold),
        edge_threshold,
        tour_threshold,
    })
}

fn degeneracy_edge_gap(inst: &TspInstance) -> (f64, bool) {
    let mut d = inst.edge_distances();
    d.sort_by(f64::total_cmp);
    let gap = d
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    (gap, gap == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{four_city_example, random_instance, uniform_instance};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    #[allow(clippy::approx_constant)]
    fn precision_closed_form() {
        // pi * sqrt(e - 1) / 0.1 evaluated by hand: 3.14159265 * 1.31083 / 0.1.
        let by_hand = 3.141_592_653_589_793 * 1.718_281_828_459_045_f64.sqrt() / 0.1;
        assert_abs_diff_eq!(by_hand, 41.18, epsilon = 5e-3);
        let p = precision_bits(E, Some(1.0), 0.1).unwrap();
        assert_abs_diff_eq!(p.target, by_hand, epsilon = 1e-12);
        assert_eq!(p.bits, 6);
        assert!(!p.clamped);
        assert_eq!(precision_bits(E, None, 0.1).unwrap(), p);
    }

    #[test]
    fn precision_clamps_near_zero_distance() {
        let p = precision_bits(E, Some(1e-12), 0.1).unwrap();
        assert_eq!(p.bits, 1);
        assert!(p.clamped);
        let zero = precision_bits(E, Some(0.0), 0.1).unwrap();
        assert_eq!(zero.target, 0.0);
        assert!(zero.clamped);
    }

    #[test]
    fn precision_errors() {
        assert!(matches!(precision_bits(E, None, 0.0), Err(Error::DegenerateInstance(_))));
        assert!(matches!(precision_bits(E, None, -1.0), Err(Error::DegenerateInstance(_))));
        assert!(precision_bits(1.0, None, 0.1).is_err());
        assert!(precision_bits(E, Some(1.5), 0.1).is_err());
    }

    #[test]
    fn precision_monotone_in_gap() {
        let mut last = u32::MAX;
        for i in 1..=100 {
            let gap = i as f64 / 100.0;
            let bits = precision_bits(E, None, gap).unwrap().bits;
            assert!(bits <= last);
            last = bits;
        }
    }

    #[test]
    fn precision_target_in_alpha() {
        // d/d(alpha) of sqrt(alpha - 1)/ln(alpha) is negative until alpha*ln(alpha) = 2(alpha - 1)
        // (alpha ≈ 4.92) and positive beyond.
        let t = |a: f64| precision_bits(a, None, 0.1).unwrap().target;
        assert!(t(4.0) < t(E));
        let grid: Vec<f64> = (0..100).map(|i| 5.0 * 1.1f64.powi(i)).collect();
        for w in grid.windows(2) {
            assert!(t(w[1]) > t(w[0]));
            assert!(
                precision_bits(w[1], None, 0.1).unwrap().bits
                    >= precision_bits(w[0], None, 0.1).unwrap().bits
            );
        }
    }

    #[test]
    fn worked_example_resources() {
        let r = estimate_resources(&four_city_example()).unwrap();
        assert_abs_diff_eq!(r.success_prob, 0.05187, epsilon = 1e-4);
        assert_abs_diff_eq!(r.expected_repeats, 19.28, epsilon = 0.01);
        assert_abs_diff_eq!(r.expected_repeats_to_optimum, 44.6, epsilon = 0.5);
        assert_eq!(r.aa_repeats, 6);
        assert_eq!(r.m_bits, Some(6));
        assert_eq!(r.optimal_count, 2);
        assert_abs_diff_eq!(r.energy_scale, 2.7f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn uniform_resources() {
        let r = estimate_resources(&uniform_instance(4, E).unwrap()).unwrap();
        let e4 = 4.0f64.exp();
        assert_abs_diff_eq!(r.energy_scale, e4, epsilon = 1e-10);
        assert_abs_diff_eq!(r.success_prob, 1.0 / e4, epsilon = 1e-14);
        assert_abs_diff_eq!(r.expected_repeats, e4, epsilon = 1e-10);
        assert_eq!(r.m_bits, None);
    }

    #[test]
    fn cp_worked_example() {
        let r = cp_check(&four_city_example(), 2.0).unwrap();
        assert_abs_diff_eq!(r.pr_optimal, 0.43, epsilon = 5e-3);
        assert!(r.satisfied);
        assert!(r.lhs <= r.rhs);
        assert!(r.pr_optimal >= 1.0 / 16.0);
        assert!(cp_check(&four_city_example(), -1.0).is_err());
    }

    #[test]
    fn cp_uniform_degree_zero() {
        let r = cp_check(&uniform_instance(5, E).unwrap(), 0.0).unwrap();
        assert_abs_diff_eq!(r.pr_optimal, 1.0, epsilon = 1e-12);
        assert!(r.satisfied);
    }

    #[test]
    fn cp_alpha_dependence_on_eight_cities() {
        // Near-unbiased sampling never meets n^-2 with 5040 tours. At alpha = n
        // eight cities sit right at the threshold; alpha = n^2 clears it.
        let (mut low, mut at_n, mut at_n2) = (0, 0, 0);
        for seed in 0..20 {
            let inst = random_instance(8, seed).unwrap();
            let sat = |a: f64| usize::from(cp_check(&inst.with_alpha(a).unwrap(), 2.0).unwrap().satisfied);
            low += sat(1.01);
            at_n += sat(8.0);
            at_n2 += sat(64.0);
        }
        assert_eq!(low, 0);
        assert!(at_n2 >= 19, "{at_n2} of 20 satisfied at alpha = 64");
        assert!(at_n <= at_n2);
    }

    #[test]
    fn sweep_increases_from_worked_value() {
        let reports = cp_sweep(&four_city_example(), &[E, 4.0, 8.0, 16.0], 2.0).unwrap();
        assert_abs_diff_eq!(reports[0].pr_optimal, 0.43, epsilon = 5e-3);
        for w in reports.windows(2) {
            assert!(w[1].pr_optimal > w[0].pr_optimal);
        }
        let single = cp_sweep(&four_city_example(), &[E], 2.0).unwrap();
        assert_eq!(single[0], cp_check(&four_city_example(), 2.0).unwrap());
    }

    #[test]
    fn sweep_on_degenerate_instance_is_flat() {
        let reports = cp_sweep(&uniform_instance(4, E).unwrap(), &[1.5, E, 10.0], 2.0).unwrap();
        for r in reports {
            assert_abs_diff_eq!(r.pr_optimal, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sweep_grid_validation() {
        let inst = four_city_example();
        assert!(cp_sweep(&inst, &[], 2.0).is_err());
        assert!(cp_sweep(&inst, &[1.0, 2.0], 2.0).is_err());
        assert!(cp_sweep(&inst, &[4.0, 2.0], 2.0).is_err());
        assert!(cp_sweep(&inst, &[2.0, 2.0], 2.0).is_err());
    }

    #[test]
    fn degeneracy_of_worked_example() {
        let r = degeneracy_report(&four_city_example()).unwrap();
        assert_abs_diff_eq!(r.min_edge_gap, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(r.min_tour_gap.unwrap(), 0.2, epsilon = 1e-12);
        assert!(!r.edge_ties && !r.precision_flag && !r.tour_gap_flag);
    }

    #[test]
    fn degeneracy_of_uniform_instance() {
        let r = degeneracy_report(&uniform_instance(4, E).unwrap()).unwrap();
        assert_eq!(r.min_edge_gap, 0.0);
        assert!(r.edge_ties && r.precision_flag);
        assert_eq!(r.min_tour_gap, Some(0.0));
        assert!(r.tour_gap_flag);
    }

    #[test]
    fn degeneracy_near_tie_raises_precision_flag() {
        let raw = vec![
            vec![0.0, 0.5, 0.5001],
            vec![0.5, 0.0, 1.0],
            vec![0.5001, 1.0, 0.0],
        ];
        let inst = TspInstance::with_default_alpha(&raw).unwrap();
        let r = degeneracy_report(&inst).unwrap();
        assert_abs_diff_eq!(r.min_edge_gap, 1e-4, epsilon = 1e-12);
        assert!(r.precision_flag && !r.edge_ties);
        assert_eq!(r.min_tour_gap, None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn resource_identities(n in 3usize..8, seed in any::<u64>(), alpha in 1.01f64..100.0) {
            let inst = random_instance(n, seed).unwrap().with_alpha(alpha).unwrap();
            let dist = gibbs_distribution(&inst).unwrap();
            let r = estimate_from_distribution(&inst, &dist).unwrap();
            let count = tour_count(n) as f64;
            prop_assert!(((r.success_prob * count - dist.z()) / dist.z()).abs() <= 1e-12);
            prop_assert!(r.expected_repeats >= 1.0);
            prop_assert!(r.expected_repeats_to_optimum >= r.expected_repeats * (1.0 - 1e-12));
            let via_prob = r.expected_repeats / dist.optimal_probability();
            prop_assert!(((r.expected_repeats_to_optimum - via_prob) / via_prob).abs() <= 1e-10);
            if r.expected_repeats_to_optimum >= 3.0 {
                prop_assert!(r.aa_repeats as f64 <= r.expected_repeats_to_optimum);
            }
            let cp = cp_from_distribution(&inst, &dist, 2.0).unwrap();
            prop_assert_eq!(cp.satisfied, cp.pr_optimal * (n as f64).powi(2) >= 1.0 - 1e-12);
            prop_assert_eq!(cp.satisfied, cp.lhs <= cp.rhs + 1e-9);
        }

        #[test]
        fn precision_bits_nonincreasing_in_gap(alpha in 1.01f64..100.0, a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(precision_bits(alpha, None, hi).unwrap().bits <= precision_bits(alpha, None, lo).unwrap().bits);
        }
    }
}
