//! Shared numeric formatting for CSV output: 9 significant digits,
//! scientific notation, locale-independent.

pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn nine_significant_digits_round_trip() {
        for &x in &[0.0, 1.0, 12.0, -3.25, 1.234567891234e-7, 6.0e2] {
            let s = sig9(x);
            let back: f64 = s.parse().unwrap();
            let tol = 1e-8 * x.abs().max(1e-300);
            assert!((back - x).abs() <= tol, "{x} -> {s} -> {back}");
        }
        assert_eq!(sig9(12.0), "1.20000000e1");
    }
}
