//! Exact classical simulation of biased-measurement quantum annealing for the
//! symmetric traveling salesman problem.
//!
//! Each edge `(j, k)` of a normalized instance carries a bias
//! `q_jk = alpha^(-d_jk)`. Rotating one ancilla per leg of every tour branch by
//! the matching gate and post-selecting on the all-zero ancilla subspace
//! leaves tour `t` with probability `alpha^(-D_t) / Z`, a Gibbs distribution
//! at inverse temperature `beta = ln alpha`.
//!
//! Modules:
//! - [`instance`]: distance matrices, normalization, biases, file format.
//! - [`tours`]: fixed-start tours, enumeration, scoring, brute-force optimum.
//! - [`gibbs`]: exact tour distribution and partition function.
//! - [`statevector`]: gate-level sparse register and the tour-basis backend.
//! - [`resources`]: precision bits, repetition and energy cost, polytime criterion.
//! - [`anneal`]: repeated-measurement protocol and Metropolis baseline.

pub mod anneal;
pub mod error;
pub mod fmt;
pub mod gibbs;
pub mod instance;
pub mod resources;
pub mod stats;
pub mod statevector;
pub mod tours;

pub use error::{Error, Result};
pub use gibbs::{gibbs_distribution, TourDistribution};
pub use instance::TspInstance;
pub use tours::Tour;
