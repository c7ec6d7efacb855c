//! Exact Gibbs distribution over fixed-start tours.
//!
//! Weights `alpha^(-D) = exp(-beta D)` are shifted by the minimum distance
//! before exponentiation, so `Z` stays representable (as `ln Z`) for very
//! large `alpha`. The shifted weights are reduced with a fixed pairwise tree,
//! which keeps `Z` bit-identical regardless of the rayon thread count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::instance::{TspInstance, MIN_CITIES};
use crate::tours::{check_enumerable, tour_count, tours_in_range, Tour, TIE_TOLERANCE};

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct TourDistribution {
    n: usize,
    alpha: f64,
    beta: f64,
    ln_z: f64,
    min_distance: f64,
    /// Tour distances by rank.
    distances: Vec<f64>,
    /// Probabilities by rank.
    probabilities: Vec<f64>,
}

/// One row of the distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TourEntry {
    pub tour: Tour,
    pub distance: f64,
    pub weight: f64,
    pub probability: f64,
}

impl TourDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Partition function `Z = sum alpha^(-D)`. May underflow to 0 for huge
    /// `alpha`; [`TourDistribution::ln_z`] does not.
    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }

    pub fn ln_z(&self) -> f64 {
        self.ln_z
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Unnormalized weight `alpha^(-D)` of the tour with this rank.
    pub fn weight(&self, rank: usize) -> f64 {
        (-self.beta * self.distances[rank]).exp()
    }

    pub fn entry(&self, rank: usize) -> TourEntry {
        TourEntry {
            tour: Tour::unrank(self.n, rank).expect("rank within distribution"),
            distance: self.distances[rank],
            weight: self.weight(rank),
            probability: self.probabilities[rank],
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = TourEntry> + '_ {
        (0..self.len()).map(|r| self.entry(r))
    }

    pub fn probability_of(&self, tour: &Tour) -> Result<f64> {
        if tour.n() != self.n {
            return Err(Error::InvalidArgument(format!(
                "tour has {} cities, distribution covers {}",
                tour.n(),
                self.n
            )));
        }
        Ok(self.probabilities[tour.rank()])
    }

    /// Ranks of tours within [`TIE_TOLERANCE`] of the minimum distance.
    pub fn optimal_ranks(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&r| self.distances[r] <= self.min_distance + TIE_TOLERANCE)
            .collect()
    }

    /// Probability of measuring any optimal tour.
    pub fn optimal_probability(&self) -> f64 {
        self.optimal_ranks()
            .into_iter()
            .map(|r| self.probabilities[r])
            .sum()
    }

    /// `ln` of the summed weight of the optimal tours.
    pub fn ln_optimal_weight(&self) -> f64 {
        self.optimal_probability().ln() + self.ln_z
    }

    /// One line per tour `<tour> <weight> <probability>` in enumeration order,
    /// then `Z <value>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in self.entries() {
            let _ = writeln!(out, "{} {} {}", e.tour, sig12(e.weight), sig12(e.probability));
        }
        let _ = writeln!(out, "Z {}", sig12(self.z()));
        out
    }
}

/// Sums with a fixed binary tree over blocks of 64.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Enumerates every fixed-start tour and normalizes the weights `alpha^(-D)`.
pub fn gibbs_distribution(inst: &TspInstance) -> Result<TourDistribution> {
    let n = inst.n();
    check_enumerable(n)?;
    let count = tour_count(n);
    let distances: Vec<f64> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let tours = tours_in_range(n, c * CHUNK, (c + 1) * CHUNK).expect("range within cap");
            tours
                .map(|t| t.legs().map(|(a, b)| inst.distance(a, b)).sum::<f64>())
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>()
        .concat();
    Ok(from_distances(n, inst.alpha(), distances))
}

pub(crate) fn from_distances(n: usize, alpha: f64, distances: Vec<f64>) -> TourDistribution {
    let beta = alpha.ln();
    let min_distance = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = distances
        .iter()
        .map(|&d| (-beta * (d - min_distance)).exp())
        .collect();
    let total = pairwise_sum(&shifted);
    let probabilities = shifted.iter().map(|w| w / total).collect();
    TourDistribution {
        n,
        alpha,
        beta,
        ln_z: -beta * min_distance + total.ln(),
        min_distance,
        distances,
        probabilities,
    }
}

/// Total probability assigned to the given tours (duplicates counted once).
pub fn solution_probability(dist: &TourDistribution, opt: &[Tour]) -> Result<f64> {
    if opt.is_empty() {
        return Err(Error::InvalidArgument("empty set of optimal tours".into()));
    }
    let mut ranks = opt
        .iter()
        .map(|t| dist.probability_of(t).map(|_| t.rank()))
        .collect::<Result<Vec<_>>>()?;
    ranks.sort_unstable();
    ranks.dedup();
    Ok(ranks.into_iter().map(|r| dist.probabilities[r]).sum())
}

/// Bounds `(n-1)!/alpha^n <= Z <= (n-1)!/alpha` for fixed-start tours, kept in
/// log space.
///
/// The lower bound holds for every normalized instance. The upper bound needs
/// every tour to have `D >= 1`, which holds whenever each tour crosses an edge
/// of length 1 (always for `n = 3`) and typically for larger `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZBounds {
    pub n: usize,
    pub alpha: f64,
    pub ln_lower: f64,
    pub ln_upper: f64,
}

impl ZBounds {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }

    /// Whether `ln Z` lies within the bounds up to a relative slack of 1e-12.
    pub fn contains_ln(&self, ln_z: f64) -> bool {
        ln_z >= self.ln_lower - 1e-12 && ln_z <= self.ln_upper + 1e-12
    }
}

pub fn z_bounds(n: usize, alpha: f64) -> Result<ZBounds> {
    if n < MIN_CITIES {
        return Err(Error::InvalidSize { n, min: MIN_CITIES });
    }
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be > 1, got {alpha}")));
    }
    let ln_count: f64 = (2..n).map(|k| (k as f64).ln()).sum();
    let beta = alpha.ln();
    Ok(ZBounds {
        n,
        alpha,
        ln_lower: ln_count - n as f64 * beta,
        ln_upper: ln_count - beta,
    })
}
