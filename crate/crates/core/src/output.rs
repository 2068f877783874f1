//! Fixed-precision number formatting shared by every file writer.

/// Formats `x` rounded to 15 significant digits, in the shortest form that
/// round-trips that rounded value.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "Inf".into()
        } else {
            "-Inf".into()
        };
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_f64(-2.5e-7), "-0.00000025");
        assert_eq!(fmt_f64(f64::INFINITY), "Inf");
    }
}
