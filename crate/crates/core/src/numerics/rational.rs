//! Exact rational scalars.
//!
//! Every probability that takes part in a coherence, envelope or order
//! decision is a [`Rational`]. Floats only appear inside parametric copula
//! evaluation and are snapped back through [`snap_f64`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Tolerance used when a floating-point evaluation is turned into a rational.
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("`{0}` is not a decimal or p/q literal")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Shorthand for `numer / denom`; panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses a finite decimal literal such as `-0.375`, `1` or `2.5e-3`.
pub fn rational_of_decimal(text: &str) -> Result<Rational, ParseRationalError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(text.to_string());

    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..].parse().map_err(|_| malformed())?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(malformed());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }

    let all_digits = format!("{whole}{frac}");
    let mut numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| malformed())?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Parses either a `p/q` fraction or a decimal literal.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let trimmed = text.trim();
    match trimmed.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| ParseRationalError::Malformed(trimmed.to_string()))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| ParseRationalError::Malformed(trimmed.to_string()))?;
            if q.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(trimmed.to_string()));
            }
            Ok(Rational::new(p, q))
        }
        None => rational_of_decimal(trimmed),
    }
}

/// Canonical text form: `3/8`, `-1/2`, `1`.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// The simplest fraction (smallest denominator) within `tolerance` of `x`.
///
/// Walks the Stern-Brocot tree through the continued-fraction expansion,
/// so the result is exact whenever `x` is within tolerance of a fraction
/// with a small denominator.
pub fn snap_f64(x: f64, tolerance: f64) -> Rational {
    assert!(x.is_finite(), "cannot snap non-finite value {x}");
    let exact = Rational::from_float(x).expect("finite float");
    let tol = Rational::from_float(tolerance).expect("finite tolerance");
    simplest_between(&(&exact - &tol), &(&exact + &tol))
}

/// Simplest rational in the closed interval `[lo, hi]`.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi);
    if lo.is_positive() {
        simplest_positive(lo, hi)
    } else if hi.is_negative() {
        -simplest_positive(&-hi, &-lo)
    } else {
        Rational::zero()
    }
}

fn simplest_positive(lo: &Rational, hi: &Rational) -> Rational {
    let floor = lo.floor();
    if &floor == lo {
        return floor;
    }
    if &(&floor + Rational::one()) <= hi {
        return floor + Rational::one();
    }
    // lo and hi share the integer part; recurse on the reciprocals of the
    // fractional parts (note the interval flips).
    let lo_frac = lo - &floor;
    let hi_frac = hi - &floor;
    let inner = simplest_positive(&hi_frac.recip(), &lo_frac.recip());
    floor + inner.recip()
}

/// `|a - b| <= tol`.
pub fn within(a: &Rational, b: &Rational, tol: &Rational) -> bool {
    (a - b).abs() <= *tol
}

pub fn min_of<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    values.into_iter().min().cloned()
}

pub fn max_of<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    values.into_iter().max().cloned()
}

/// Tolerance expressed as a rational, `0` for exact checks.
pub fn tolerance_rational(tolerance: f64) -> Rational {
    if tolerance == 0.0 {
        Rational::zero()
    } else {
        snap_f64(tolerance, tolerance / 1024.0)
    }
}

/// True iff the fraction is in lowest terms with a positive denominator.
pub fn is_normalized(value: &Rational) -> bool {
    value.denom().is_positive() && value.numer().gcd(value.denom()).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals() {
        assert_eq!(rational_of_decimal("0.25").unwrap(), rat(1, 4));
        assert_eq!(rational_of_decimal("0.375").unwrap(), rat(3, 8));
        assert_eq!(rational_of_decimal("1").unwrap(), rat(1, 1));
        assert_eq!(rational_of_decimal("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(rational_of_decimal(".5").unwrap(), rat(1, 2));
        assert_eq!(rational_of_decimal("2.5e-3").unwrap(), rat(1, 400));
        assert_eq!(rational_of_decimal("3E2").unwrap(), int(300));
    }

    #[test]
    fn rejects_non_decimal_text() {
        for bad in ["", "abc", "1.2.3", "0x10", "-", "1e", "1/2"] {
            assert!(rational_of_decimal(bad).is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn fraction_literals() {
        assert_eq!(parse_rational("3/8").unwrap(), rat(3, 8));
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert_eq!(format_rational(&rat(6, 16)), "3/8");
        assert_eq!(format_rational(&int(1)), "1");
    }

    #[test]
    fn snapping_recovers_small_fractions() {
        assert_eq!(snap_f64(0.35, SNAP_TOLERANCE), rat(7, 20));
        assert_eq!(snap_f64(1.0 / 3.0, SNAP_TOLERANCE), rat(1, 3));
        assert_eq!(snap_f64(-0.125, SNAP_TOLERANCE), rat(-1, 8));
        assert_eq!(snap_f64(0.0, SNAP_TOLERANCE), int(0));
        let pi = snap_f64(std::f64::consts::PI, SNAP_TOLERANCE);
        assert!((to_f64(&pi) - std::f64::consts::PI).abs() <= SNAP_TOLERANCE);
    }

    #[test]
    fn arithmetic_stays_normalized() {
        let a = rat(2, 6) + rat(1, 6);
        assert!(is_normalized(&a));
        assert_eq!(a, rat(1, 2));
        let b = rat(-4, 8) * rat(3, -9);
        assert!(is_normalized(&b));
        assert_eq!(b, rat(1, 6));
    }
}
