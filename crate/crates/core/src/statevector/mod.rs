//! Simulation of the biased-measurement circuit: prepare the tour
//! superposition, rotate one ancilla per leg, post-select, measure.
//!
//! Two backends share this interface. [`QubitRegister`] tracks the full
//! marker-plus-ancilla register gate by gate; [`TourStateVector`] keeps one
//! amplitude per tour and applies the combined leg factor directly. After
//! projection both hold amplitude `sqrt(alpha^(-D) / Z)` on each tour.

mod gate;
mod projection;
mod register;
mod tour_basis;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use gate::RotationGate;
pub use projection::Projection;
pub use register::{QubitRegister, DENSE_DEFAULT_CAP, DENSE_HARD_CAP};
pub use tour_basis::TourStateVector;

use crate::error::{Error, Result};
use crate::instance::TspInstance;
use crate::tours::Tour;

/// Shots drawn from one RNG stream; fixed so results do not depend on the
/// thread count.
const SHOTS_PER_STREAM: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dense,
    Tour,
    /// Dense up to [`DENSE_DEFAULT_CAP`] cities, tour basis beyond.
    Auto,
}

impl Backend {
    pub fn resolve(self, n: usize) -> Backend {
        match self {
            Backend::Auto if n <= DENSE_DEFAULT_CAP => Backend::Dense,
            Backend::Auto => Backend::Tour,
            other => other,
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Backend::Dense),
            "tour" => Ok(Backend::Tour),
            "auto" => Ok(Backend::Auto),
            _ => Err(Error::InvalidArgument(format!(
                "unknown backend `{s}`, expected dense, tour or auto"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Dense(QubitRegister),
    Tours(TourStateVector),
}

/// Equal superposition over all fixed-start tours on the chosen backend.
pub fn prepare_tour_superposition(n: usize, backend: Backend) -> Result<QuantumState> {
    Ok(match backend.resolve(n) {
        Backend::Dense => QuantumState::Dense(QubitRegister::prepare(n)?),
        _ => QuantumState::Tours(TourStateVector::prepare(n)?),
    })
}

impl QuantumState {
    pub fn n(&self) -> usize {
        match self {
            QuantumState::Dense(r) => r.n(),
            QuantumState::Tours(s) => s.n(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            QuantumState::Dense(_) => Backend::Dense,
            QuantumState::Tours(_) => Backend::Tour,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            QuantumState::Dense(r) => r.norm_sqr(),
            QuantumState::Tours(s) => s.norm_sqr(),
        }
    }

    /// Applies the leg gates with arbitrary per-edge biases.
    pub fn apply_bias_with(&mut self, bias: impl Fn(usize, usize) -> f64) -> Result<()> {
        match self {
            QuantumState::Dense(r) => r.apply_bias_with(bias),
            QuantumState::Tours(s) => s.apply_bias_with(bias),
        }
    }

    /// Applies the leg gates for `q_ab = alpha^(-d_ab)` of `inst`.
    pub fn apply_bias_gates(&mut self, inst: &TspInstance) -> Result<()> {
        if inst.n() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "state has {} cities, instance has {}",
                self.n(),
                inst.n()
            )));
        }
        self.apply_bias_with(|a, b| inst.bias_unchecked(a, b))
    }

    pub fn project_valid(&mut self) -> Result<Projection> {
        match self {
            QuantumState::Dense(r) => r.project_valid(),
            QuantumState::Tours(s) => s.project_valid(),
        }
    }

    /// Measurement outcome table, tours in rank order for the tour backend and
    /// in basis order for the dense backend.
    pub fn outcome_table(&self) -> Result<OutcomeTable> {
        let rows: Vec<(Tour, f64)> = match self {
            QuantumState::Dense(r) => r
                .nonzero()
                .into_iter()
                .map(|(k, a)| Ok((r.decode(k)?, a.norm_sqr())))
                .collect::<Result<_>>()?,
            QuantumState::Tours(s) => s
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(rank, a)| Ok((Tour::unrank(s.n(), rank)?, a.norm_sqr())))
                .collect::<Result<_>>()?,
        };
        OutcomeTable::new(rows)
    }

    /// Tour distribution of the (projected) state, indexed by tour rank.
    pub fn tour_probabilities(&self) -> Result<Vec<f64>> {
        let mut out = vec![0.0; crate::tours::tour_count(self.n())];
        let table = self.outcome_table()?;
        for (t, p) in table.tours.iter().zip(table.probabilities()) {
            out[t.rank()] += p;
        }
        Ok(out)
    }

    /// `shots` i.i.d. measurements, deterministic per seed.
    pub fn measure(&self, seed: u64, shots: usize) -> Result<Vec<Tour>> {
        let table = self.outcome_table()?;
        Ok(table
            .sample_indices(seed, shots)
            .into_iter()
            .map(|i| table.tours[i].clone())
            .collect())
    }

    pub fn dump(&self) -> String {
        match self {
            QuantumState::Dense(r) => r.dump(),
            QuantumState::Tours(s) => s.dump(),
        }
    }
}

/// Tours with their measurement probabilities and the cumulative table used
/// for inverse-CDF sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    tours: Vec<Tour>,
    cumulative: Vec<f64>,
}

impl OutcomeTable {
    pub fn new(rows: Vec<(Tour, f64)>) -> Result<Self> {
        let mut tours = Vec::with_capacity(rows.len());
        let mut cumulative = Vec::with_capacity(rows.len());
        let mut acc = 0.0;
        for (t, p) in rows {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidArgument(format!("invalid outcome probability {p}")));
            }
            acc += p;
            tours.push(t);
            cumulative.push(acc);
        }
        if tours.is_empty() || acc <= 0.0 {
            return Err(Error::InvalidArgument("no outcome with positive probability".into()));
        }
        if (acc - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "state not normalized (norm² = {acc}); project before measuring"
            )));
        }
        Ok(Self { tours, cumulative })
    }

    pub fn tours(&self) -> &[Tour] {
        &self.tours
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    /// Index of the outcome for a uniform draw `u` in `[0, 1)`.
    pub fn index_for(&self, u: f64) -> usize {
        let total = *self.cumulative.last().expect("nonempty table");
        let x = u * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }

    /// Draws outcome indices with one ChaCha stream per block of shots.
    pub fn sample_indices(&self, seed: u64, shots: usize) -> Vec<usize> {
        let streams = shots.div_ceil(SHOTS_PER_STREAM);
        (0..streams)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64);
                let count = SHOTS_PER_STREAM.min(shots - s * SHOTS_PER_STREAM);
                (0..count)
                    .map(|_| self.index_for(rng.gen::<f64>()))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .concat()
    }

    /// Outcome counts keyed by tour.
    pub fn sample_counts(&self, seed: u64, shots: usize) -> BTreeMap<Tour, u64> {
        let mut counts = vec![0u64; self.tours.len()];
        for i in self.sample_indices(seed, shots) {
            counts[i] += 1;
        }
        self.tours.iter().cloned().zip(counts).filter(|(_, c)| *c > 0).collect()
    }
}
