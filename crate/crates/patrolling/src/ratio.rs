//! Exact rational arithmetic helpers.
//!
//! All lengths, offsets and times in this crate are `BigRational`, so girth
//! computations, extremity boundaries and tour breakpoints are bit-stable.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Ratio = BigRational;

pub fn rat(n: i64) -> Ratio {
    Ratio::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Ratio {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Ratio {
    Ratio::zero()
}

pub fn one() -> Ratio {
    Ratio::one()
}

/// Parses "3", "-1/2" or a decimal string like "0.25" into an exact rational.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int, dec)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int == "-" || int.is_empty() {
            BigInt::zero()
        } else {
            int.parse()
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))?
        };
        if !dec.chars().all(|c| c.is_ascii_digit()) || dec.is_empty() {
            return Err(Error::Parse(format!("bad number {s:?}")));
        }
        let scale = BigInt::from(10u8).pow(dec.len() as u32);
        let frac_part: BigInt = dec
            .parse()
            .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
        let mag = Ratio::from_integer(int.abs()) + Ratio::new(frac_part, scale);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
    Ok(Ratio::from_integer(n))
}

pub fn to_f64(r: &Ratio) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a reduced approximation for huge terms.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Canonical string form: integer when possible, otherwise "p/q".
pub fn ratio_string(r: &Ratio) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering to `places` digits, for human-readable report columns.
pub fn decimal_string(r: &Ratio, places: usize) -> String {
    format!("{:.*}", places, to_f64(r))
}

/// Floor of a/b as a BigInt quotient, used for modular reduction.
pub fn rem_euclid(a: &Ratio, modulus: &Ratio) -> Ratio {
    assert!(modulus.is_positive());
    let q = (a / modulus).floor();
    a - q * modulus
}

/// True iff `a` is an integer multiple of `step`.
pub fn divides(step: &Ratio, a: &Ratio) -> bool {
    assert!(step.is_positive());
    (a / step).is_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_ratio("3").unwrap(), rat(3));
        assert_eq!(parse_ratio("1/2").unwrap(), frac(1, 2));
        assert_eq!(parse_ratio("0.25").unwrap(), frac(1, 4));
        assert_eq!(parse_ratio("-1.5").unwrap(), frac(-3, 2));
        assert!(parse_ratio("abc").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn modular_reduction() {
        assert_eq!(rem_euclid(&rat(7), &rat(3)), rat(1));
        assert_eq!(rem_euclid(&rat(-1), &rat(3)), rat(2));
        assert_eq!(rem_euclid(&frac(-1, 2), &rat(2)), frac(3, 2));
    }

    #[test]
    fn strings() {
        assert_eq!(ratio_string(&frac(6, 4)), "3/2");
        assert_eq!(ratio_string(&rat(5)), "5");
        assert_eq!(decimal_string(&frac(1, 4), 3), "0.250");
    }
}
