//! Goodness-of-fit helpers used to check sampled statistics against their
//! exact distributions.

use serde::Serialize;

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // The alternating series converges slowly here and the value is 1 to
        // double precision anyway.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub samples: usize,
}

/// One-sample KS test of positive integer samples against a discrete CDF.
///
/// The asymptotic Kolmogorov p-value is conservative for discrete
/// distributions.
pub fn ks_test_discrete(samples: &[u64], cdf: impl Fn(u64) -> f64) -> KsResult {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mut statistic = 0.0f64;
    let mut i = 0;
    let max = sorted.last().copied().unwrap_or(0);
    // The empirical and model CDFs are both step functions on the integers.
    for k in 0..=max {
        while i < n && sorted[i] <= k {
            i += 1;
        }
        let empirical = i as f64 / n as f64;
        statistic = statistic.max((empirical - cdf(k)).abs());
    }
    let p_value = kolmogorov_survival((n as f64).sqrt() * statistic);
    KsResult {
        statistic,
        p_value,
        samples: n,
    }
}

/// CDF of the geometric distribution on `{1, 2, ...}` with success probability `p`.
pub fn geometric_cdf(p: f64, k: u64) -> f64 {
    if k == 0 {
        0.0
    } else {
        1.0 - (1.0 - p).powf(k as f64)
    }
}

/// Total-variation distance `0.5 * sum |p_i - q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
