//! Fixed numeric formatting for file outputs.

/// Formats `x` with 9 significant digits, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    sig(x, 9)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-6..21).contains(&exp) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let rounded: f64 = sci.parse().expect("round trip");
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, rounded)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(2.0 / 57.0), "0.0350877193");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(-0.25), "-0.25");
        assert_eq!(sig9(14.541160001), "14.54116");
        assert_eq!(sig9(123456789012.0), "123456789000");
        assert_eq!(sig9(1e-9), "1e-9");
        assert_eq!(sig9(0.0), "0");
    }
}
