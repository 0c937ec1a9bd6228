//! Exact rational arithmetic helpers for energies and protocol parameters.
//!
//! Energies enter as strings such as `"3/2"`, `"-1"`, or `"0.25"` and are
//! kept as [`BigRational`] so that energy differences, gcd computations,
//! and lattice membership are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses a rational from `"p/q"`, an integer string, or a decimal string.
pub fn parse_rational(input: &str) -> Result<BigRational> {
    let s = input.trim();
    let fail = |reason: &str| Error::Parse {
        context: "rational",
        input: input.to_string(),
        reason: reason.to_string(),
    };
    if s.is_empty() {
        return Err(fail("empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let p: BigInt = num
            .trim()
            .parse()
            .map_err(|_| fail("numerator is not an integer"))?;
        let q: BigInt = den
            .trim()
            .parse()
            .map_err(|_| fail("denominator is not an integer"))?;
        if q.is_zero() {
            return Err(fail("denominator is zero"));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let int_digits = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            int_part
                .parse::<BigInt>()
                .map_err(|_| fail("integer part is not an integer"))?
        };
        if frac_part.is_empty() {
            return Ok(BigRational::from_integer(int_digits));
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(fail("fractional part contains non-digits"));
        }
        let frac: BigInt = frac_part
            .parse()
            .map_err(|_| fail("fractional part is not an integer"))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let magnitude = int_digits.abs() * &scale + frac;
        return Ok(BigRational::new(sign * magnitude, scale));
    }
    let p: BigInt = s.parse().map_err(|_| fail("not an integer"))?;
    Ok(BigRational::from_integer(p))
}

/// Formats a rational canonically: reduced, `"p"` for integers, `"p/q"`
/// with positive denominator otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Greatest common divisor of a nonempty slice of rationals, defined as
/// the largest rational g with every input an integer multiple of g.
/// Zero entries are ignored; returns zero when all entries are zero.
pub fn rational_gcd(values: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for v in values {
        if v.is_zero() {
            continue;
        }
        if acc.is_zero() {
            acc = v.abs();
        } else {
            acc = gcd_pair(&acc, &v.abs());
        }
    }
    acc
}

fn gcd_pair(a: &BigRational, b: &BigRational) -> BigRational {
    // gcd(p1/q1, p2/q2) = gcd(p1*q2, p2*q1) / (q1*q2), reduced by the
    // BigRational constructor.
    let p = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    BigRational::new(p, a.denom() * b.denom())
}

/// Least common multiple of the denominators of a slice of rationals,
/// in reduced form. Returns 1 for an empty slice.
pub fn denominator_lcm(values: &[BigRational]) -> BigInt {
    values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Nearest f64 to a rational. Magnitudes beyond f64 range saturate to
/// the corresponding infinity.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_fraction_integer_and_decimal_forms() {
        assert_eq!(rat("3/2"), BigRational::new(3.into(), 2.into()));
        assert_eq!(rat("-7"), BigRational::from_integer((-7).into()));
        assert_eq!(rat("0.25"), BigRational::new(1.into(), 4.into()));
        assert_eq!(rat("-0.5"), BigRational::new((-1).into(), 2.into()));
        assert_eq!(rat(" 6/4 "), BigRational::new(3.into(), 2.into()));
        assert_eq!(rat("-3/-6"), BigRational::new(1.into(), 2.into()));
        assert_eq!(rat("2."), BigRational::from_integer(2.into()));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("0.2e3").is_err());
        assert!(parse_rational("--2").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rat("6/4")), "3/2");
        assert_eq!(format_rational(&rat("-6/4")), "-3/2");
        assert_eq!(format_rational(&rat("8/2")), "4");
        assert_eq!(format_rational(&rat("0")), "0");
        assert_eq!(format_rational(&rat("1/-2")), "-1/2");
    }

    #[test]
    fn gcd_of_rationals() {
        assert_eq!(rational_gcd(&[rat("1/2"), rat("1/3")]), rat("1/6"));
        assert_eq!(rational_gcd(&[rat("3/2"), rat("-9/4")]), rat("3/4"));
        assert_eq!(rational_gcd(&[rat("0"), rat("5")]), rat("5"));
        assert_eq!(rational_gcd(&[rat("0"), rat("0")]), rat("0"));
        assert_eq!(rational_gcd(&[rat("4"), rat("6")]), rat("2"));
    }

    #[test]
    fn lcm_of_denominators() {
        assert_eq!(denominator_lcm(&[rat("1/2"), rat("1/3")]), 6.into());
        assert_eq!(denominator_lcm(&[rat("5"), rat("7")]), 1.into());
        assert_eq!(denominator_lcm(&[]), 1.into());
    }

    #[test]
    fn decimal_round_trip_is_exact() {
        assert_eq!(rat("0.22"), BigRational::new(11.into(), 50.into()));
        assert_eq!(rational_to_f64(&rat("1/4")), 0.25);
    }
}
