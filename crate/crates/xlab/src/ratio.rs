//! Small helpers around exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `n / d` as an exact rational.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn ratio_u(n: u128, d: u128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_int(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

pub fn zero() -> BigRational {
    BigRational::zero()
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// Lossy conversion for reporting; exact values stay rational.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let scale = BigInt::from(1u64 << 53);
        let scaled = (r * BigRational::from(scale.clone())).round();
        scaled.to_integer().to_f64().unwrap_or(f64::NAN) / (1u64 << 53) as f64
    })
}

/// Canonical `num/den` rendering (always reduced, denominator positive).
pub fn to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse(s: &str) -> Option<BigRational> {
    let (n, d) = s.split_once('/')?;
    let n: BigInt = n.trim().parse().ok()?;
    let d: BigInt = d.trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

pub fn is_nonnegative(r: &BigRational) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_equality() {
        assert_eq!(ratio(22, 50), ratio(11, 25));
        assert_eq!(to_string(&ratio(22, 50)), "11/25");
    }

    #[test]
    fn parse_roundtrip() {
        let r = ratio(-3, 7);
        assert_eq!(parse(&to_string(&r)).unwrap(), r);
        assert!(parse("1/0").is_none());
    }
}
