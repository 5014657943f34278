//! Fixed-precision number formatting shared by schedule text and CSV output.

/// Significant digits used in every emitted number.
pub const SIG_DIGITS: usize = 12;

/// Format like C's `%.12g`: shortest of fixed or exponent notation, trailing
/// zeros stripped.
pub fn g12(x: f64) -> String {
    general(x, SIG_DIGITS)
}

/// `%.{digits}g`.
pub fn general(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
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
    fn matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (std::f64::consts::PI, "3.14159265359"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e-5, "1e-05"),
            (0.0001, "0.0001"),
            (2.5e-7, "2.5e-07"),
            (0.999999999999951, "1"),
            (9.9999999999995e-5, "0.0001"),
            (1e100, "1e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(g12(x), want, "formatting {x:e}");
        }
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for x in [0.125, 5.4321098765, 1e-3, 0.0723817, 7.5e-4] {
            let back: f64 = g12(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11);
        }
    }
}
