use serde::Serialize;

/// Outcome of projecting onto the valid subspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Projection {
    /// Norm² of the kept subspace before renormalization.
    pub success_probability: f64,
    /// Norm² of everything that was zeroed.
    pub discarded_probability: f64,
}
