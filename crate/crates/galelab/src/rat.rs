//! Exact rational parsing, formatting, and base-2 logarithms.
//!
//! Rationals are accepted in three shapes: `"p/q"`, a bare integer `"p"`, or
//! a decimal `"0.75"` (converted exactly, so `0.1` means 1/10, not the nearest
//! double). Formatting always emits the reduced form, omitting `/1`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses `"p/q"`, `"p"`, or a decimal like `"-1.25"` into an exact rational.
pub fn parse(text: &str) -> Result<Rational, RatError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RatError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| RatError::Malformed(text.to_string()))?;
        let d: BigInt = den.trim().parse().map_err(|_| RatError::Malformed(text.to_string()))?;
        if d.is_zero() {
            return Err(RatError::ZeroDenominator(text.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RatError::Malformed(text.to_string()));
        }
        let negative = int_part.trim_start().starts_with('-');
        let int_part = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            format!("{int_part}0")
        } else {
            int_part.to_string()
        };
        let whole: BigInt = int_part.parse().map_err(|_| RatError::Malformed(text.to_string()))?;
        let frac: BigInt = frac_part.parse().map_err(|_| RatError::Malformed(text.to_string()))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = if negative { -frac } else { frac };
        return Ok(Rational::new(whole * &scale + frac, scale));
    }
    let n: BigInt = s.parse().map_err(|_| RatError::Malformed(text.to_string()))?;
    Ok(Rational::from_integer(n))
}

/// Formats a rational in reduced form, as `"p"` when the denominator is 1 and
/// `"p/q"` otherwise.
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn from_u64(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(numer: u64, denom: u64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// r^exp with exact integer exponentiation; r^0 = 1.
pub fn pow(r: &Rational, exp: u32) -> Rational {
    Rational::new(Pow::pow(r.numer(), exp), Pow::pow(r.denom(), exp))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Magnitudes beyond f64 range: fall back to the log representation.
        let sign = if r.is_negative() { -1.0 } else { 1.0 };
        sign * (log2_biguint(r.numer().magnitude()) - log2_biguint(r.denom().magnitude())).exp2()
    })
}

/// log2 of a positive big integer, accurate to ~1e-15 relative error even when
/// the value is far outside f64 range.
pub fn log2_biguint(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "log2 of zero");
    let bits = n.bits();
    if bits <= 53 {
        return (n.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_u64().unwrap();
    (top as f64).log2() + shift as f64
}

/// log2 of a positive rational; `None` when the value is zero or negative.
pub fn log2(r: &Rational) -> Option<f64> {
    match r.numer().sign() {
        Sign::NoSign | Sign::Minus => None,
        Sign::Plus => {
            Some(log2_biguint(r.numer().magnitude()) - log2_biguint(r.denom().magnitude()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse("7").unwrap(), from_u64(7));
        assert_eq!(parse("0.75").unwrap(), ratio(3, 4));
        assert_eq!(parse("-1.25").unwrap(), -ratio(5, 4));
        assert_eq!(parse(" 6/8 ").unwrap(), ratio(3, 4));
        assert_eq!(parse("1.1").unwrap(), ratio(11, 10));
    }

    #[test]
    fn rejects_malformed_literals() {
        assert!(parse("").is_err());
        assert!(parse("1/0").is_err());
        assert!(parse("a/b").is_err());
        assert!(parse("1.").is_err());
        assert!(parse("1.2.3").is_err());
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(format(&ratio(6, 8)), "3/4");
        assert_eq!(format(&from_u64(5)), "5");
    }

    #[test]
    fn log2_matches_double_in_range() {
        let r = ratio(27, 1024);
        let expected = (27.0f64 / 1024.0).log2();
        assert!((log2(&r).unwrap() - expected).abs() < 1e-12);
        assert!(log2(&Rational::zero()).is_none());
    }

    #[test]
    fn log2_handles_values_beyond_f64() {
        // 2^40000 is far outside f64 range; log2 must still be exact.
        let big = BigUint::from(1u32) << 40000;
        assert!((log2_biguint(&big) - 40000.0).abs() < 1e-9);
        let r = Rational::new(BigInt::from(3u32) << 20000, BigInt::from(1));
        let got = log2(&r).unwrap();
        assert!((got - (20000.0 + 3f64.log2())).abs() < 1e-9);
    }
}
