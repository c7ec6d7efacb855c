//! Number formatting shared by the text dumps.

/// Rounds `x` to `digits` significant digits and prints the shortest decimal
/// that round-trips the rounded value.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x);
    format!("{rounded}")
}

/// Twelve significant digits, the precision of every file format here.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_significant_digits() {
        assert_eq!(sig12(0.7), "0.7");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig(std::f64::consts::PI, 4), "3.142");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(0.0), "0");
    }
}
