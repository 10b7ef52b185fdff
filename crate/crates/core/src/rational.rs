//! Exact rational arithmetic for objective weights.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::CoreError;

/// Exact rational used for objective coefficients and values. All other
/// model data is integer.
pub type Rational = Ratio<i128>;

/// Parse a decimal literal ("0.2", "1", "0.375") into an exact rational, so
/// a weighting factor written with one decimal digit really is n/10.
pub fn rational_from_decimal(text: &str) -> Result<Rational, CoreError> {
    let s = text.trim();
    let bad = || CoreError::Validation(format!("not a decimal number: {:?}", text));
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1i128, rest),
        None => (1i128, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    if frac_part.len() > 27 {
        return Err(CoreError::Validation(format!(
            "too many decimal digits: {:?}",
            text
        )));
    }
    let mut numer: i128 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        numer = numer
            .checked_mul(10)
            .and_then(|v| v.checked_add((c as u8 - b'0') as i128))
            .ok_or_else(bad)?;
    }
    let denom = 10i128.pow(frac_part.len() as u32);
    Ok(Rational::new(sign * numer, denom))
}

/// Exact conversion of an f64 through its shortest round-trip decimal form.
/// `0.2f64` comes back as exactly 1/5.
pub fn rational_from_f64(value: f64) -> Result<Rational, CoreError> {
    if !value.is_finite() {
        return Err(CoreError::Validation(format!(
            "not a finite number: {}",
            value
        )));
    }
    rational_from_decimal(&format!("{}", value))
}

/// Decimal rendering with 12 significant digits, used by the LP exporter.
pub fn to_decimal_12(value: &Rational) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let f = value.to_f64().unwrap_or(0.0);
    let exp = f.abs().log10().floor() as i32;
    let mut out = if (-18..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, f)
    } else {
        format!("{:.11e}", f)
    };
    if out.contains('.') && !out.contains('e') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(rational_from_decimal("0.2").unwrap(), Rational::new(1, 5));
        assert_eq!(rational_from_decimal("1").unwrap(), Rational::new(1, 1));
        assert_eq!(
            rational_from_decimal("0.375").unwrap(),
            Rational::new(3, 8)
        );
        assert_eq!(rational_from_decimal("-1.5").unwrap(), Rational::new(-3, 2));
        assert!(rational_from_decimal("abc").is_err());
        assert!(rational_from_decimal("").is_err());
    }

    #[test]
    fn f64_roundtrip_recovers_short_decimals() {
        assert_eq!(rational_from_f64(0.2).unwrap(), Rational::new(1, 5));
        assert_eq!(rational_from_f64(0.5).unwrap(), Rational::new(1, 2));
        assert_eq!(rational_from_f64(1.0).unwrap(), Rational::new(1, 1));
    }

    #[test]
    fn twelve_digit_rendering() {
        assert_eq!(to_decimal_12(&Rational::new(1, 2)), "0.5");
        assert_eq!(to_decimal_12(&Rational::new(0, 1)), "0");
        assert_eq!(to_decimal_12(&Rational::new(1, 3)), "0.333333333333");
        assert_eq!(to_decimal_12(&Rational::new(-1, 8)), "-0.125");
        assert_eq!(to_decimal_12(&Rational::new(1, 20)), "0.05");
    }
}
