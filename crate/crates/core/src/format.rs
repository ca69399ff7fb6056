//! Deterministic number formatting for tables and reports.

/// Shortest rendering of `x` with 12 significant digits, in the manner of
/// C's `%.12g`. Negative zero prints as `0`.
pub fn g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::g12;

    #[test]
    fn matches_printf_g() {
        assert_eq!(g12(0.0), "0");
        assert_eq!(g12(-0.0), "0");
        assert_eq!(g12(1.0), "1");
        assert_eq!(g12(0.5), "0.5");
        assert_eq!(g12(-2.25), "-2.25");
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(g12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(g12(1e-5), "1e-05");
        assert_eq!(g12(1.5e-12), "1.5e-12");
        assert_eq!(g12(0.0001), "0.0001");
        assert_eq!(g12(123456789012.0), "123456789012");
        assert_eq!(g12(1234567890123.0), "1.23456789012e+12");
        assert_eq!(g12(0.999999999999999), "1");
    }
}
