//! Exact rational scalars used throughout the engine.
//!
//! Every numeric constant in an expression, a determining system or a
//! nullspace vector is a `Rational`. `num_rational::BigRational` already
//! keeps the canonical form we need: gcd(|num|, den) = 1, den > 0, zero
//! stored as 0/1.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational n/d. Panics on d = 0 (construction-time misuse, not input data).
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn to_f64(r: &Rational) -> f64 {
    // BigRational::to_f64 handles magnitudes beyond i64.
    r.to_f64().unwrap_or(f64::NAN)
}

/// r^k for integer k of either sign. k < 0 requires r != 0.
pub fn pow_i64(r: &Rational, k: i64) -> Result<Rational> {
    if k == 0 {
        return Ok(Rational::one());
    }
    if r.is_zero() {
        if k < 0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        return Ok(Rational::zero());
    }
    let mag = r.pow(k.unsigned_abs() as i32);
    Ok(if k < 0 { mag.recip() } else { mag })
}

/// Exact n-th root when it exists: r = (p/q)^n with p/q rational.
pub fn nth_root(r: &Rational, n: u32) -> Option<Rational> {
    assert!(n >= 1);
    if n == 1 {
        return Some(r.clone());
    }
    if r.is_negative() && n % 2 == 0 {
        return None;
    }
    let num = int_nth_root(r.numer(), n)?;
    let den = int_nth_root(r.denom(), n)?;
    Some(Rational::new(num, den))
}

fn int_nth_root(v: &BigInt, n: u32) -> Option<BigInt> {
    let root = v.nth_root(n);
    if root.pow(n) == *v {
        Some(root)
    } else {
        None
    }
}

/// Parse "p", "p/q" or "-p/q" (used by the expression and problem-file parsers).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => {
            let n: BigInt = text.parse().ok()?;
            Some(Rational::from_integer(n))
        }
    }
}

/// Canonical text form: "3", "-3", "3/4", "-3/4".
pub fn format_rational(r: &Rational) -> String {
    if is_integer(r) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let r = rat(6, -4);
        assert_eq!(format_rational(&r), "-3/2");
        assert!(rat(0, 5).is_zero());
        assert_eq!(rat(0, 5), rat_int(0));
    }

    #[test]
    fn roots() {
        assert_eq!(nth_root(&rat(4, 9), 2), Some(rat(2, 3)));
        assert_eq!(nth_root(&rat(-8, 27), 3), Some(rat(-2, 3)));
        assert_eq!(nth_root(&rat(-4, 9), 2), None);
        assert_eq!(nth_root(&rat(2, 1), 2), None);
    }

    #[test]
    fn integer_powers() {
        assert_eq!(pow_i64(&rat(2, 3), -2).unwrap(), rat(9, 4));
        assert_eq!(pow_i64(&rat(5, 1), 0).unwrap(), rat_int(1));
        assert!(pow_i64(&rat_int(0), -1).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("-3/6"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("12"), Some(rat_int(12)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
