//! Symmetric TSP instances with distances normalized so the longest edge is 1.
//!
//! Cities are 0-based in the API. Text formats and tour strings print them
//! 1-based.

use std::f64::consts::E;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::sig12;

/// Smallest instance the artifact accepts; `n = 2` has a single tour.
pub const MIN_CITIES: usize = 3;

/// Entries closer than this are treated as the same distance when checking symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

const RANDOM_LOW: f64 = 0.05;
const RANDOM_HIGH: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TspInstance {
    n: usize,
    /// Row-major `n x n`, symmetric, zero diagonal, max off-diagonal exactly 1.
    dist: Vec<f64>,
    alpha: f64,
}

impl TspInstance {
    /// Validates and normalizes `raw`, then attaches the bias base `alpha`.
    pub fn new(raw: &[Vec<f64>], alpha: f64) -> Result<Self> {
        let n = raw.len();
        if n < MIN_CITIES {
            return Err(Error::InvalidSize { n, min: MIN_CITIES });
        }
        check_alpha(alpha)?;
        let normalized = normalize(raw)?;
        Ok(Self {
            n,
            dist: normalized.into_iter().flatten().collect(),
            alpha,
        })
    }

    /// Same as [`TspInstance::new`] with `alpha = e`.
    pub fn with_default_alpha(raw: &[Vec<f64>]) -> Result<Self> {
        Self::new(raw, E)
    }

    /// A copy of this instance analysed at another bias base.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Inverse temperature `ln alpha`.
    pub fn beta(&self) -> f64 {
        self.alpha.ln()
    }

    /// Normalized distance between cities `j` and `k` (0 on the diagonal).
    #[inline]
    pub fn distance(&self, j: usize, k: usize) -> f64 {
        self.dist[j * self.n + k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Off-diagonal distances of the upper triangle, row-major.
    pub fn edge_distances(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for j in 0..self.n {
            for k in j + 1..self.n {
                out.push(self.distance(j, k));
            }
        }
        out
    }

    /// Edge bias `q_jk = alpha^(-d_jk)`, always in `[1/alpha, 1)`.
    pub fn bias_of(&self, j: usize, k: usize) -> Result<f64> {
        if j == k || j >= self.n || k >= self.n {
            return Err(Error::InvalidEdge { j, k, n: self.n });
        }
        Ok(self.bias_unchecked(j, k))
    }

    #[inline]
    pub(crate) fn bias_unchecked(&self, j: usize, k: usize) -> f64 {
        (-self.beta() * self.distance(j, k)).exp()
    }

    /// Serializes in the line-oriented instance format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tsp {}", self.n);
        if self.alpha == E {
            out.push_str("alpha e\n");
        } else {
            let _ = writeln!(out, "alpha {}", sig12(self.alpha));
        }
        for row in self.dist.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|&d| sig12(d)).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must be finite and > 1, got {alpha}"
        )))
    }
}

/// Divides every entry by the largest off-diagonal distance.
///
/// The input must be square, symmetric within [`SYMMETRY_TOLERANCE`], with a
/// zero diagonal and strictly positive off-diagonal entries. The result is
/// exactly symmetric (the upper triangle is mirrored) and its maximum is
/// exactly 1.
pub fn normalize(raw: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "distance matrix needs at least two cities, got {n}"
        )));
    }
    for (j, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidArgument(format!(
                "row {} has {} entries, expected {n}",
                j + 1,
                row.len()
            )));
        }
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "row {} contains non-finite entry {x}",
                j + 1
            )));
        }
        if row[j].abs() > SYMMETRY_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "diagonal entry {} is {}, expected 0",
                j + 1,
                row[j]
            )));
        }
    }

    let mut max = 0.0f64;
    for j in 0..n {
        for k in j + 1..n {
            let (a, b) = (raw[j][k], raw[k][j]);
            if (a - b).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "asymmetric entries d[{},{}] = {a} and d[{},{}] = {b}",
                    j + 1,
                    k + 1,
                    k + 1,
                    j + 1
                )));
            }
            if a <= 0.0 || b <= 0.0 {
                return Err(Error::DegenerateInstance(format!(
                    "distance between cities {} and {} is {a}; off-diagonal distances must be > 0",
                    j + 1,
                    k + 1
                )));
            }
            max = max.max(a);
        }
    }

    let mut out = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in j + 1..n {
            let d = raw[j][k] / max;
            out[j][k] = d;
            out[k][j] = d;
        }
    }
    Ok(out)
}

/// Parses the line-oriented instance format:
///
/// ```text
/// # comment
/// tsp 4
/// alpha e          # optional, defaults to e
/// 0 .7 .5 1
/// .7 0 .8 .6
/// .5 .8 0 .9
/// 1 .6 .9 0
/// ```
pub fn parse_instance(text: &str) -> Result<TspInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty input, expected `tsp <n>`"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("tsp") {
        return Err(Error::parse(header_line, "expected header `tsp <n>`"));
    }
    let n: usize = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(header_line, "header needs an integer city count"))?;
    if tokens.next().is_some() {
        return Err(Error::parse(header_line, "trailing tokens after `tsp <n>`"));
    }
    if n < MIN_CITIES {
        return Err(Error::parse(
            header_line,
            format!("n = {n}, at least {MIN_CITIES} cities required"),
        ));
    }

    let mut alpha = E;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut row_lines = Vec::with_capacity(n);
    for (line_no, line) in lines {
        let mut tokens = line.split_whitespace().peekable();
        if tokens.peek() == Some(&"alpha") {
            if !rows.is_empty() {
                return Err(Error::parse(line_no, "`alpha` must precede the matrix"));
            }
            tokens.next();
            let value = tokens
                .next()
                .ok_or_else(|| Error::parse(line_no, "`alpha` needs a value"))?;
            alpha = parse_alpha(value).ok_or_else(|| {
                Error::parse(line_no, format!("invalid alpha `{value}`, expected a number > 1 or `e`"))
            })?;
            if tokens.next().is_some() {
                return Err(Error::parse(line_no, "trailing tokens after alpha value"));
            }
            continue;
        }
        if rows.len() == n {
            return Err(Error::parse(line_no, format!("more than {n} matrix rows")));
        }
        let row = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("invalid number `{t}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != n {
            return Err(Error::parse(
                line_no,
                format!("row has {} entries, expected {n}", row.len()),
            ));
        }
        rows.push(row);
        row_lines.push(line_no);
    }
    if rows.len() != n {
        let last = row_lines.last().copied().unwrap_or(header_line);
        return Err(Error::parse(
            last,
            format!("expected {n} matrix rows, found {}", rows.len()),
        ));
    }

    // Report matrix problems against the line of the offending row.
    for j in 0..n {
        if !rows[j][j].is_finite() || rows[j][j].abs() > SYMMETRY_TOLERANCE {
            return Err(Error::parse(row_lines[j], format!("diagonal entry is {}, expected 0", rows[j][j])));
        }
        for k in 0..n {
            if j == k {
                continue;
            }
            let x = rows[j][k];
            if !x.is_finite() || x <= 0.0 {
                return Err(Error::parse(
                    row_lines[j],
                    format!("off-diagonal entry in column {} is {x}, must be > 0", k + 1),
                ));
            }
            if k > j && (x - rows[k][j]).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::parse(
                    row_lines[k],
                    format!(
                        "asymmetric matrix: d[{},{}] = {x} but d[{},{}] = {}",
                        j + 1,
                        k + 1,
                        k + 1,
                        j + 1,
                        rows[k][j]
                    ),
                ));
            }
        }
    }

    TspInstance::new(&rows, alpha).map_err(|e| Error::parse(header_line, e.to_string()))
}

fn parse_alpha(token: &str) -> Option<f64> {
    let alpha = if token == "e" { E } else { token.parse().ok()? };
    (alpha.is_finite() && alpha > 1.0).then_some(alpha)
}

/// The raw symmetric matrix behind [`random_instance`]: i.i.d. uniform entries
/// in `[0.05, 1)` on the upper triangle, drawn row-major.
pub fn random_raw_matrix(n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n < MIN_CITIES {
        return Err(Error::InvalidSize { n, min: MIN_CITIES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in j + 1..n {
            let d = rng.gen_range(RANDOM_LOW..RANDOM_HIGH);
            m[j][k] = d;
            m[k][j] = d;
        }
    }
    Ok(m)
}

/// Seeded random instance with `alpha = e`.
pub fn random_instance(n: usize, seed: u64) -> Result<TspInstance> {
    TspInstance::with_default_alpha(&random_raw_matrix(n, seed)?)
}

/// The four-city worked example (`alpha = e`), with
/// `d12 = .7, d13 = .5, d14 = 1, d23 = .8, d24 = .6, d34 = .9`.
pub fn four_city_example() -> TspInstance {
    let raw = vec![
        vec![0.0, 0.7, 0.5, 1.0],
        vec![0.7, 0.0, 0.8, 0.6],
        vec![0.5, 0.8, 0.0, 0.9],
        vec![1.0, 0.6, 0.9, 0.0],
    ];
    TspInstance::with_default_alpha(&raw).expect("embedded example is valid")
}

/// Every off-diagonal distance equal to 1.
pub fn uniform_instance(n: usize, alpha: f64) -> Result<TspInstance> {
    let raw: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|k| if j == k { 0.0 } else { 1.0 }).collect())
        .collect();
    TspInstance::new(&raw, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normalize_keeps_already_normalized_matrix() {
        let inst = four_city_example();
        let rows = inst.rows();
        assert_eq!(normalize(&rows).unwrap(), rows);
        assert_eq!(inst.distance(0, 3), 1.0);
        assert_eq!(inst.distance(1, 2), 0.8);
    }

    #[test]
    fn normalize_uniform_matrix_to_ones() {
        let raw: Vec<Vec<f64>> = (0..4)
            .map(|j| (0..4).map(|k| if j == k { 0.0 } else { 5.0 }).collect())
            .collect();
        let out = normalize(&raw).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(out[j][k], if j == k { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn normalize_divides_by_max() {
        let raw = vec![
            vec![0.0, 2.0, 4.0],
            vec![2.0, 0.0, 3.0],
            vec![4.0, 3.0, 0.0],
        ];
        let out = normalize(&raw).unwrap();
        assert_eq!(out[0][1], 0.5);
        assert_eq!(out[0][2], 1.0);
        assert_eq!(out[1][2], 0.75);
    }

    #[test]
    fn zero_distance_is_degenerate() {
        let raw = vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert!(matches!(normalize(&raw), Err(Error::DegenerateInstance(_))));
        let negative = vec![
            vec![0.0, -1.0, 1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert!(matches!(normalize(&negative), Err(Error::DegenerateInstance(_))));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let raw = vec![
            vec![0.0, 1.0, 1.0],
            vec![0.9, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert!(matches!(normalize(&raw), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn example_biases() {
        let inst = four_city_example();
        assert_abs_diff_eq!(inst.bias_of(0, 1).unwrap(), 0.4966, epsilon = 5e-5);
        assert_abs_diff_eq!(inst.bias_of(0, 3).unwrap(), 0.3679, epsilon = 5e-5);
        assert_abs_diff_eq!(inst.bias_of(0, 2).unwrap(), 0.6065, epsilon = 5e-5);
        assert_abs_diff_eq!(inst.bias_of(3, 0).unwrap(), 1.0 / E, epsilon = 1e-15);
    }

    #[test]
    fn bias_at_unit_distance_is_inverse_alpha() {
        for alpha in [1.5, 2.0, E, 10.0, 1e6] {
            let inst = uniform_instance(3, alpha).unwrap();
            let q = inst.bias_of(1, 2).unwrap();
            assert!((q - 1.0 / alpha).abs() <= 1e-15 / alpha.min(1.0) * 10.0);
        }
    }

    #[test]
    fn bias_of_rejects_diagonal_and_out_of_range() {
        let inst = four_city_example();
        assert_eq!(
            inst.bias_of(2, 2),
            Err(Error::InvalidEdge { j: 2, k: 2, n: 4 })
        );
        assert!(inst.bias_of(0, 4).is_err());
    }

    #[test]
    fn alpha_must_exceed_one() {
        let inst = four_city_example();
        assert!(inst.with_alpha(1.0).is_err());
        assert!(inst.with_alpha(0.5).is_err());
        assert!(inst.with_alpha(f64::INFINITY).is_err());
        assert_eq!(inst.with_alpha(4.0).unwrap().beta(), 4.0f64.ln());
    }

    #[test]
    fn parse_example_file() {
        let text = "# four-city example\ntsp 4\nalpha e\n0 .7 .5 1\n.7 0 .8 .6\n.5 .8 0 .9\n1 .6 .9 0\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst, four_city_example());
        assert_abs_diff_eq!(inst.bias_of(0, 2).unwrap(), 0.6065, epsilon = 5e-5);
    }

    #[test]
    fn parse_defaults_alpha_and_normalizes() {
        let text = "tsp 3\n0 1 3\n1 0 2  # row two\n3 2 0\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.alpha(), E);
        assert_eq!(inst.distance(0, 2), 1.0);
        assert_eq!(inst.edge_distances().iter().cloned().fold(0.0, f64::max), 1.0);
        assert_abs_diff_eq!(inst.distance(1, 2), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases: &[(&str, usize)] = &[
            ("tsp 2\n0 1\n1 0\n", 1),
            ("tsb 3\n", 1),
            ("tsp 3\n0 1 1\n1 0\n1 1 0\n", 3),
            ("tsp 3\n0 1 1\n1 0 1\n", 3),
            ("tsp 3\n\n0 1 1\n1 0 0\n1 0 0\n", 4),
            ("tsp 3\n0 1 1\n1 0 1\n1 0.5 0\n", 4),
            ("tsp 3\nalpha 0.5\n0 1 1\n1 0 1\n1 1 0\n", 2),
            ("tsp 3\n0 1 x\n1 0 1\n1 1 0\n", 2),
            ("tsp 3\n0 1 1\n1 0 1\n1 1 0\n1 1 1\n", 5),
        ];
        for &(text, line) in cases {
            match parse_instance(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "input {text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn serialization_writes_alpha_and_round_trips() {
        let inst = four_city_example();
        let text = inst.to_text();
        assert!(text.starts_with("tsp 4\nalpha e\n0 0.7 0.5 1\n"));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn random_instance_is_deterministic() {
        assert_eq!(random_instance(4, 7).unwrap(), random_instance(4, 7).unwrap());
        assert_ne!(random_instance(4, 7).unwrap(), random_instance(4, 8).unwrap());
        assert_eq!(random_instance(2, 7), Err(Error::InvalidSize { n: 2, min: 3 }));
    }

    #[test]
    fn random_raw_entries_respect_generator_range() {
        for seed in 0..20 {
            let raw = random_raw_matrix(5, seed).unwrap();
            for j in 0..5 {
                for k in 0..5 {
                    if j != k {
                        assert!((RANDOM_LOW..RANDOM_HIGH).contains(&raw[j][k]));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bias_recovers_distance(n in 3usize..9, seed in any::<u64>(), alpha in 1.001f64..1e4) {
            let inst = random_instance(n, seed).unwrap().with_alpha(alpha).unwrap();
            for j in 0..n {
                for k in 0..n {
                    if j == k { continue; }
                    let q = inst.bias_of(j, k).unwrap();
                    prop_assert!(q >= 1.0 / alpha * (1.0 - 1e-15) && q < 1.0);
                    let recovered = -q.ln() / alpha.ln();
                    prop_assert!((recovered - inst.distance(j, k)).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn normalize_is_idempotent(n in 3usize..9, seed in any::<u64>(), scale in 0.01f64..100.0) {
            let raw: Vec<Vec<f64>> = random_raw_matrix(n, seed).unwrap()
                .into_iter().map(|r| r.into_iter().map(|x| x * scale).collect()).collect();
            let once = normalize(&raw).unwrap();
            prop_assert_eq!(normalize(&once).unwrap(), once);
        }

        #[test]
        fn text_round_trip(n in 3usize..9, seed in any::<u64>(), alpha in 1.001f64..1e4) {
            let inst = random_instance(n, seed).unwrap().with_alpha(alpha).unwrap();
            let back = parse_instance(&inst.to_text()).unwrap();
            prop_assert!((back.alpha() - alpha).abs() <= 1e-11 * alpha);
            for j in 0..n {
                for k in 0..n {
                    prop_assert!((back.distance(j, k) - inst.distance(j, k)).abs() <= 1e-12);
                }
            }
        }
    }
}
