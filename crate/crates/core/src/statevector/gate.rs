use serde::Serialize;

use crate::error::{Error, Result};

/// Real rotation `[[sqrt q, sqrt(1-q)], [-sqrt(1-q), sqrt q]]`, i.e. `R_theta`
/// with `theta = arccos(sqrt q)`.
///
/// Acting on `|0>`, the `|0>` component keeps amplitude `sqrt q`, so
/// `|<0|U|0>|^2 = q` and `|<0|U|1>|^2 = 1 - q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationGate {
    q: f64,
    theta: f64,
    matrix: [[f64; 2]; 2],
}

impl RotationGate {
    /// `q` must lie in `[0, 1]`; `q = 1` is the identity.
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!(
                "gate bias must lie in [0, 1], got {q}"
            )));
        }
        let c = q.sqrt();
        let s = (1.0 - q).sqrt();
        Ok(Self {
            q,
            theta: c.acos(),
            matrix: [[c, s], [-s, c]],
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.matrix
    }

    /// The inverse rotation `R_theta^T`.
    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.matrix;
        Self {
            matrix: [[a, c], [b, d]],
            ..*self
        }
    }

    /// `|<0|U|a>|^2` for a computational basis input `a`.
    pub fn outcome_zero_probability(&self, input_one: bool) -> f64 {
        let amp = self.matrix[0][usize::from(input_one)];
        amp * amp
    }

    #[inline]
    pub(crate) fn apply<T>(&self, a0: T, a1: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let [[m00, m01], [m10, m11]] = self.matrix;
        (a0 * m00 + a1 * m01, a0 * m10 + a1 * m11)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_range_bias() {
        assert!(RotationGate::new(-0.1).is_err());
        assert!(RotationGate::new(1.5).is_err());
        assert!(RotationGate::new(f64::NAN).is_err());
    }

    #[test]
    fn unit_bias_is_identity() {
        let g = RotationGate::new(1.0).unwrap();
        assert_eq!(g.matrix(), [[1.0, 0.0], [-0.0, 1.0]]);
        assert_eq!(g.theta(), 0.0);
    }

    proptest! {
        #[test]
        fn orthogonal_and_probability_rule(q in 1e-6f64..=1.0) {
            let g = RotationGate::new(q).unwrap();
            let m = g.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    let dot = m[0][i] * m[0][j] + m[1][i] * m[1][j];
                    let id = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((dot - id).abs() <= 1e-14);
                }
            }
            prop_assert!((g.outcome_zero_probability(false) - q).abs() <= 1e-14);
            prop_assert!((g.outcome_zero_probability(true) - (1.0 - q)).abs() <= 1e-14);
            prop_assert!((g.theta().cos() - q.sqrt()).abs() <= 1e-14);
            // |0> rotated, outcome 0 measured with probability q.
            let (a0, _) = g.apply(1.0f64, 0.0);
            prop_assert!((a0 * a0 - q).abs() <= 1e-14);
        }

        #[test]
        fn transpose_inverts(q in 0.0f64..=1.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let g = RotationGate::new(q).unwrap();
            let (a, b) = g.apply(x, y);
            let (c, d) = g.transpose().apply(a, b);
            prop_assert!((c - x).abs() <= 1e-14 && (d - y).abs() <= 1e-14);
        }
    }
}
