//! Reduced backend with one amplitude per fixed-start tour.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::projection::Projection;
use crate::error::{Error, Result};
use crate::tours::{check_enumerable, enumerate_tours, tour_count, Tour};

#[derive(Debug, Clone, PartialEq)]
pub struct TourStateVector {
    n: usize,
    /// Indexed by tour rank.
    amps: Vec<Complex64>,
}

impl TourStateVector {
    pub fn prepare(n: usize) -> Result<Self> {
        check_enumerable(n).map_err(|e| match e {
            Error::TooLarge { n, cap, .. } => Error::TooLarge {
                context: "tour-basis backend",
                n,
                cap,
            },
            other => other,
        })?;
        let count = tour_count(n);
        Ok(Self {
            n,
            amps: vec![Complex64::new(1.0 / (count as f64).sqrt(), 0.0); count],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies each tour amplitude by the product of `sqrt(bias)` over its legs.
    pub fn apply_bias_with(&mut self, bias: impl Fn(usize, usize) -> f64) -> Result<()> {
        for (amp, tour) in self.amps.iter_mut().zip(enumerate_tours(self.n)?) {
            let mut factor = 1.0;
            for (a, b) in tour.legs() {
                let q = bias(a, b);
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::InvalidArgument(format!(
                        "gate bias must lie in [0, 1], got {q}"
                    )));
                }
                factor *= q.sqrt();
            }
            *amp *= factor;
        }
        Ok(())
    }

    /// Every basis state already encodes a tour, so this only renormalizes.
    pub fn project_valid(&mut self) -> Result<Projection> {
        let kept = self.norm_sqr();
        if kept < 1e-300 {
            return Err(Error::NumericalUnderflow(kept));
        }
        let scale = 1.0 / kept.sqrt();
        for a in &mut self.amps {
            *a *= scale;
        }
        Ok(Projection {
            success_probability: kept,
            discarded_probability: 0.0,
        })
    }

    /// One line per nonzero amplitude: `<tour> <re> <im>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (rank, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                let t = Tour::unrank(self.n, rank).expect("rank in range");
                let _ = writeln!(out, "{t} {:e} {:e}", a.re, a.im);
            }
        }
        out
    }
}
