//! Closed tours that start at city 0, their enumeration, and scoring.
//!
//! Tours are enumerated over the `(n-1)!` orderings of the remaining cities in
//! lexicographic order, so a tour's position in that order (its rank) is a
//! stable index shared by the distribution, the tour-basis backend, and the
//! Metropolis occupancy counts.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instance::{TspInstance, MIN_CITIES};

/// Largest `n` for which tours are enumerated (11! ≈ 4e7 tours).
pub const ENUMERATION_CAP: usize = 12;

/// Absolute tolerance for treating two tour distances as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tour {
    order: Vec<usize>,
}

impl Tour {
    /// Builds a tour from 0-based city order; `order[0]` must be city 0.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n < MIN_CITIES {
            return Err(Error::InvalidSize { n, min: MIN_CITIES });
        }
        if order[0] != 0 {
            return Err(Error::InvalidArgument(format!(
                "tour must start at city 1, got {}",
                order[0] + 1
            )));
        }
        let mut seen = vec![false; n];
        for &c in &order {
            if c >= n || std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidArgument(format!(
                    "{order:?} is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(Self { order })
    }

    /// Builds a tour from 1-based city labels, e.g. `[1, 2, 4, 3]`.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let order = labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::InvalidArgument("city labels start at 1".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(order)
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// The `n` legs `(order[j], order[j+1])`, the last one closing back to city 0.
    pub fn legs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order.len();
        (0..n).map(move |j| (self.order[j], self.order[(j + 1) % n]))
    }

    /// The same cycle traversed in the opposite direction, still starting at 0.
    pub fn reversed(&self) -> Tour {
        let mut order = self.order.clone();
        order[1..].reverse();
        Tour { order }
    }

    /// Position of this tour in [`enumerate_tours`] order.
    pub fn rank(&self) -> usize {
        let suffix = &self.order[1..];
        let m = suffix.len();
        let mut rank = 0;
        for i in 0..m {
            let smaller = suffix[i + 1..].iter().filter(|&&c| c < suffix[i]).count();
            rank += smaller * factorial(m - 1 - i);
        }
        rank
    }

    /// Inverse of [`Tour::rank`].
    pub fn unrank(n: usize, mut rank: usize) -> Result<Tour> {
        check_enumerable(n)?;
        let count = tour_count(n);
        if rank >= count {
            return Err(Error::InvalidArgument(format!(
                "rank {rank} out of range for {count} tours"
            )));
        }
        let mut pool: Vec<usize> = (1..n).collect();
        let mut order = Vec::with_capacity(n);
        order.push(0);
        for i in (0..n - 1).rev() {
            let f = factorial(i);
            order.push(pool.remove(rank / f));
            rank %= f;
        }
        Ok(Tour { order })
    }
}

/// Conventional notation with 1-based labels: `(1)243(1)`. Labels are
/// separated by `-` once any label has two digits.
impl fmt::Display for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.order.len() > 9 { "-" } else { "" };
        let body: Vec<String> = self.order[1..].iter().map(|c| (c + 1).to_string()).collect();
        write!(f, "(1){}(1)", body.join(sep))
    }
}

impl Serialize for Tour {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub(crate) fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// Number of fixed-start tours, `(n-1)!`.
pub fn tour_count(n: usize) -> usize {
    factorial(n.saturating_sub(1))
}

pub(crate) fn check_enumerable(n: usize) -> Result<()> {
    if n < MIN_CITIES {
        return Err(Error::InvalidSize { n, min: MIN_CITIES });
    }
    if n > ENUMERATION_CAP {
        return Err(Error::TooLarge {
            context: "tour enumeration",
            n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// Lazily yields tours in lexicographic order of their suffix.
#[derive(Debug, Clone)]
pub struct TourIter {
    next: Option<Vec<usize>>,
    remaining: usize,
}

impl Iterator for TourIter {
    type Item = Tour;

    fn next(&mut self) -> Option<Tour> {
        if self.remaining == 0 {
            return None;
        }
        let current = self.next.take()?;
        self.remaining -= 1;
        let mut succ = current.clone();
        if next_permutation(&mut succ[1..]) {
            self.next = Some(succ);
        }
        Some(Tour { order: current })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for TourIter {}

/// All `(n-1)!` tours starting at city 0.
pub fn enumerate_tours(n: usize) -> Result<TourIter> {
    tours_in_range(n, 0, tour_count(n.min(ENUMERATION_CAP)))
}

/// Tours with ranks in `start..end`, for handing disjoint ranges to workers.
pub fn tours_in_range(n: usize, start: usize, end: usize) -> Result<TourIter> {
    check_enumerable(n)?;
    let end = end.min(tour_count(n));
    if start >= end {
        return Ok(TourIter {
            next: None,
            remaining: 0,
        });
    }
    Ok(TourIter {
        next: Some(Tour::unrank(n, start)?.order),
        remaining: end - start,
    })
}

fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let Some(i) = (0..xs.len() - 1).rev().find(|&i| xs[i] < xs[i + 1]) else {
        return false;
    };
    let j = (i + 1..xs.len()).rev().find(|&j| xs[j] > xs[i]).unwrap();
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}

fn check_tour(inst: &TspInstance, t: &Tour) -> Result<()> {
    if t.n() != inst.n() {
        return Err(Error::InvalidArgument(format!(
            "tour has {} cities, instance has {}",
            t.n(),
            inst.n()
        )));
    }
    Ok(())
}

/// Total distance `D` of the closed tour, including the leg back to city 0.
pub fn tour_distance(inst: &TspInstance, t: &Tour) -> Result<f64> {
    check_tour(inst, t)?;
    Ok(t.legs().map(|(a, b)| inst.distance(a, b)).sum())
}

/// Product of leg biases, equal to `alpha^(-D)`.
pub fn tour_bias_product(inst: &TspInstance, t: &Tour) -> Result<f64> {
    check_tour(inst, t)?;
    Ok(t.legs().map(|(a, b)| inst.bias_unchecked(a, b)).product())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalTours {
    pub distance: f64,
    pub tours: Vec<Tour>,
}

/// Brute-force scan returning the minimum distance and every tour within
/// [`TIE_TOLERANCE`] of it, in enumeration order.
pub fn optimal_tours(inst: &TspInstance) -> Result<OptimalTours> {
    let mut best = f64::INFINITY;
    let mut tours = Vec::new();
    for t in enumerate_tours(inst.n())? {
        let d = tour_distance(inst, &t)?;
        if d < best - TIE_TOLERANCE {
            best = d;
            tours.clear();
            tours.push(t);
        } else if d <= best + TIE_TOLERANCE {
            best = best.min(d);
            tours.push(t);
        }
    }
    // A later, slightly smaller minimum can leave earlier ties outside the window.
    tours.retain(|t| tour_distance(inst, t).is_ok_and(|d| d <= best + TIE_TOLERANCE));
    Ok(OptimalTours {
        distance: best,
        tours,
    })
}
