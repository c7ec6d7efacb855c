//! Gate-level register: `n` marker blocks of `n` qubits plus one ancilla per leg.
//!
//! Block `j` holds a single zero at the position of the city visited `j`-th;
//! all other marker bits are one. Leg `j` (from block `j` to block `j+1`, the
//! last leg wrapping to block 0) owns ancilla `j`. Only reachable basis states
//! are stored, keyed by the bit pattern with qubit `i` at bit `i`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;

use super::gate::RotationGate;
use super::projection::Projection;
use crate::error::{Error, Result};
use crate::instance::MIN_CITIES;
use crate::tours::{enumerate_tours, tour_count, Tour};

/// Default city cap for the gate-level backend (20 qubits).
pub const DENSE_DEFAULT_CAP: usize = 4;
/// Hard cap: 5 cities use 30 qubits.
pub const DENSE_HARD_CAP: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct QubitRegister {
    n: usize,
    amplitudes: HashMap<u64, Complex64>,
}

impl QubitRegister {
    /// Equal superposition of all tour encodings with every ancilla in `|0>`.
    pub fn prepare(n: usize) -> Result<Self> {
        Self::prepare_with_cap(n, DENSE_DEFAULT_CAP)
    }

    /// As [`QubitRegister::prepare`] with a raised cap (at most [`DENSE_HARD_CAP`]).
    pub fn prepare_with_cap(n: usize, cap: usize) -> Result<Self> {
        if n < MIN_CITIES {
            return Err(Error::InvalidSize { n, min: MIN_CITIES });
        }
        let cap = cap.min(DENSE_HARD_CAP);
        if n > cap {
            return Err(Error::TooLarge {
                context: "dense statevector backend",
                n,
                cap,
            });
        }
        if n == DENSE_HARD_CAP {
            log::warn!("dense backend with {n} cities uses {} qubits", n * n + n);
        }
        let amp = Complex64::new(1.0 / (tour_count(n) as f64).sqrt(), 0.0);
        let amplitudes = enumerate_tours(n)?
            .map(|t| (encode_with(n, &t), amp))
            .collect();
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_qubits(&self) -> usize {
        self.n * self.n + self.n
    }

    /// Qubit index of the marker at `(block, position)`.
    pub fn marker(&self, block: usize, position: usize) -> usize {
        block * self.n + position
    }

    /// Qubit index of the ancilla owned by `leg`.
    pub fn ancilla(&self, leg: usize) -> usize {
        self.n * self.n + leg
    }

    pub fn amplitude(&self, basis: u64) -> Complex64 {
        self.amplitudes.get(&basis).copied().unwrap_or_default()
    }

    /// Nonzero amplitudes sorted by basis index.
    pub fn nonzero(&self) -> Vec<(u64, Complex64)> {
        let mut v: Vec<_> = self.amplitudes.iter().map(|(&k, &a)| (k, a)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.nonzero().iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn encode(&self, tour: &Tour) -> u64 {
        encode_with(self.n, tour)
    }

    /// Reads the tour out of the marker blocks. Fails unless every block has
    /// exactly one zero, the zeros form a permutation starting at city 0 and
    /// every ancilla is zero.
    pub fn decode(&self, basis: u64) -> Result<Tour> {
        if !self.is_valid(basis) {
            return Err(Error::Internal(format!(
                "basis state {} does not encode a tour",
                self.bitstring(basis)
            )));
        }
        let n = self.n;
        let order = (0..n)
            .map(|block| {
                let bits = (basis >> (block * n)) & ((1 << n) - 1);
                (!bits & ((1 << n) - 1)).trailing_zeros() as usize
            })
            .collect();
        Tour::new(order).map_err(|e| Error::Internal(e.to_string()))
    }

    /// Valid subspace: exactly one zero marker per block, all ancillas zero.
    pub fn is_valid(&self, basis: u64) -> bool {
        is_valid_basis(self.n, basis)
    }

    /// Applies `gate` to `target` on every branch where each `(qubit, value)`
    /// control holds.
    pub fn apply_controlled(
        &mut self,
        gate: &RotationGate,
        target: usize,
        controls: &[(usize, bool)],
    ) -> Result<()> {
        let width = self.num_qubits();
        if target >= width || controls.iter().any(|&(c, _)| c >= width || c == target) {
            return Err(Error::InvalidArgument(format!(
                "target {target} or controls {controls:?} invalid for {width} qubits"
            )));
        }
        let t = 1u64 << target;
        let fires = |k: u64| controls.iter().all(|&(c, v)| ((k >> c) & 1 == 1) == v);
        let bases: BTreeSet<u64> = self
            .amplitudes
            .keys()
            .filter(|&&k| fires(k))
            .map(|&k| k & !t)
            .collect();
        for base in bases {
            let (a0, a1) = gate.apply(self.amplitude(base), self.amplitude(base | t));
            self.set(base, a0);
            self.set(base | t, a1);
        }
        Ok(())
    }

    fn set(&mut self, basis: u64, amp: Complex64) {
        if amp.norm_sqr() == 0.0 {
            self.amplitudes.remove(&basis);
        } else {
            self.amplitudes.insert(basis, amp);
        }
    }

    /// For each leg `j` and ordered city pair `(a, b)`, rotates ancilla `j` by
    /// the gate for `bias(a, b)`, controlled on marker `(j, a)` and marker
    /// `(j+1 mod n, b)` both being zero.
    pub fn apply_bias_with(&mut self, bias: impl Fn(usize, usize) -> f64) -> Result<()> {
        let n = self.n;
        for leg in 0..n {
            let next = (leg + 1) % n;
            for a in 0..n {
                for b in (0..n).filter(|&b| b != a) {
                    let gate = RotationGate::new(bias(a, b))?;
                    let controls = [(self.marker(leg, a), false), (self.marker(next, b), false)];
                    self.apply_controlled(&gate, self.ancilla(leg), &controls)?;
                }
            }
        }
        Ok(())
    }

    /// Zeroes everything outside the valid subspace and renormalizes.
    pub fn project_valid(&mut self) -> Result<Projection> {
        let (mut kept, mut discarded) = (0.0, 0.0);
        for (k, a) in self.nonzero() {
            if self.is_valid(k) {
                kept += a.norm_sqr();
            } else {
                discarded += a.norm_sqr();
            }
        }
        if kept < 1e-300 {
            return Err(Error::NumericalUnderflow(kept));
        }
        let scale = 1.0 / kept.sqrt();
        let n = self.n;
        self.amplitudes.retain(|&k, _| is_valid_basis(n, k));
        for a in self.amplitudes.values_mut() {
            *a *= scale;
        }
        Ok(Projection {
            success_probability: kept,
            discarded_probability: discarded,
        })
    }

    /// Squared amplitude of each tour's valid branch (ancillas all zero), by rank.
    pub fn valid_branch_probabilities(&self) -> Result<Vec<f64>> {
        enumerate_tours(self.n)?
            .map(|t| Ok(self.amplitude(self.encode(&t)).norm_sqr()))
            .collect()
    }

    /// Bit pattern with marker blocks separated by `_` and ancillas last.
    pub fn bitstring(&self, basis: u64) -> String {
        let n = self.n;
        let mut s = String::with_capacity(self.num_qubits() + n);
        for group in 0..=n {
            if group > 0 {
                s.push('_');
            }
            for i in 0..n {
                let q = group * n + i;
                s.push(if (basis >> q) & 1 == 1 { '1' } else { '0' });
            }
        }
        s
    }

    /// One line per nonzero basis state: `<bitstring> <re> <im>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, a) in self.nonzero() {
            let _ = writeln!(out, "{} {:e} {:e}", self.bitstring(k), a.re, a.im);
        }
        out
    }
}

fn is_valid_basis(n: usize, basis: u64) -> bool {
    let block_mask = (1u64 << n) - 1;
    let one_zero_per_block =
        (0..n).all(|b| ((basis >> (b * n)) & block_mask).count_ones() as usize == n - 1);
    one_zero_per_block && basis >> (n * n) == 0
}

fn encode_with(n: usize, tour: &Tour) -> u64 {
    let markers = (1u64 << (n * n)) - 1;
    tour.order()
        .iter()
        .enumerate()
        .fold(markers, |acc, (block, &city)| acc & !(1u64 << (block * n + city)))
}
