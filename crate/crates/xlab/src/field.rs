//! Arithmetic in small finite fields GF(q), q ≤ 16.
//!
//! Prime fields use modular arithmetic; the prime-power orders 4, 8, 9, 16 use
//! a fixed irreducible polynomial each, with elements encoded as base-p digit
//! strings packed into a `u8`. All operations go through precomputed tables,
//! so elements are plain `u8` values in `0..q`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {0} exceeds the supported maximum {MAX_FIELD_ORDER}")]
    UnsupportedSize(u64),
}

/// GF(q) with table-driven arithmetic.
#[derive(Clone)]
pub struct FiniteField {
    q: u8,
    p: u8,
    m: u8,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}
impl Eq for FiniteField {}

impl std::fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl Serialize for FiniteField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.q)
    }
}

impl<'de> Deserialize<'de> for FiniteField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let q = u8::deserialize(d)?;
        make_field(u64::from(q)).map_err(serde::de::Error::custom)
    }
}

/// Irreducible polynomials for the supported extension fields, as coefficient
/// lists c_0 + c_1 x + ... + c_m x^m.
fn irreducible(q: u64) -> Option<(u8, u8, &'static [u8])> {
    match q {
        4 => Some((2, 2, &[1, 1, 1])),
        8 => Some((2, 3, &[1, 1, 0, 1])),
        9 => Some((3, 2, &[1, 0, 1])),
        16 => Some((2, 4, &[1, 1, 0, 0, 1])),
        _ => None,
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..n).all(|d| d * d > n || n % d != 0)
}

/// Builds GF(q). Fails on non-prime-powers and on orders above the cap.
pub fn make_field(q: u64) -> Result<FiniteField, FieldError> {
    if q > MAX_FIELD_ORDER {
        // Reject composite sizes above the cap with the more specific error.
        let mut n = q;
        let mut factors = 0;
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                factors += 1;
                while n % d == 0 {
                    n /= d;
                }
            }
            d += 1;
        }
        if n > 1 {
            factors += 1;
        }
        if factors != 1 {
            return Err(FieldError::NotPrimePower(q));
        }
        return Err(FieldError::UnsupportedSize(q));
    }
    if is_prime(q) {
        return Ok(FiniteField::prime(q as u8));
    }
    match irreducible(q) {
        Some((p, m, poly)) => Ok(FiniteField::extension(q as u8, p, m, poly)),
        None => Err(FieldError::NotPrimePower(q)),
    }
}

impl FiniteField {
    fn prime(p: u8) -> Self {
        let q = p as usize;
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = ((a + b) % q) as u8;
                mul[a * q + b] = ((a * b) % q) as u8;
            }
        }
        Self::finish(p, p, 1, add, mul)
    }

    fn extension(q: u8, p: u8, m: u8, poly: &[u8]) -> Self {
        let qu = q as usize;
        let digits = |mut x: u8| -> Vec<u8> {
            let mut v = Vec::with_capacity(m as usize);
            for _ in 0..m {
                v.push(x % p);
                x /= p;
            }
            v
        };
        let pack = |v: &[u8]| -> u8 {
            let mut x = 0u8;
            for &c in v.iter().rev() {
                x = x * p + c;
            }
            x
        };
        let mut add = vec![0u8; qu * qu];
        let mut mul = vec![0u8; qu * qu];
        for a in 0..q {
            for b in 0..q {
                let (da, db) = (digits(a), digits(b));
                let sum: Vec<u8> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qu + b as usize] = pack(&sum);

                // Polynomial product reduced modulo the defining polynomial.
                let mut prod = vec![0u16; 2 * m as usize];
                for (i, &x) in da.iter().enumerate() {
                    for (j, &y) in db.iter().enumerate() {
                        prod[i + j] += u16::from(x) * u16::from(y);
                    }
                }
                for deg in (m as usize..prod.len()).rev() {
                    let coeff = prod[deg] % u16::from(p);
                    if coeff != 0 {
                        // x^deg = -sum_{i<m} poly[i]/poly[m] x^(deg-m+i); leading coeff is 1.
                        for i in 0..m as usize {
                            let sub = (coeff * u16::from(poly[i])) % u16::from(p);
                            prod[deg - m as usize + i] =
                                (prod[deg - m as usize + i] + u16::from(p) - sub) % u16::from(p);
                        }
                    }
                    prod[deg] = 0;
                }
                let reduced: Vec<u8> = prod[..m as usize].iter().map(|&c| (c % u16::from(p)) as u8).collect();
                mul[a as usize * qu + b as usize] = pack(&reduced);
            }
        }
        Self::finish(q, p, m, add, mul)
    }

    fn finish(q: u8, p: u8, m: u8, add: Vec<u8>, mul: Vec<u8>) -> Self {
        let qu = q as usize;
        let mut neg = vec![0u8; qu];
        for a in 0..qu {
            for b in 0..qu {
                if add[a * qu + b] == 0 {
                    neg[a] = b as u8;
                }
            }
        }
        let mut inv = vec![0u8; qu];
        for a in 1..qu {
            for b in 1..qu {
                if mul[a * qu + b] == 1 {
                    inv[a] = b as u8;
                }
            }
        }
        FiniteField { q, p, m, add, mul, neg, inv }
    }

    pub fn order(&self) -> u8 {
        self.q
    }

    pub fn characteristic(&self) -> u8 {
        self.p
    }

    pub fn extension_degree(&self) -> u8 {
        self.m
    }

    /// All elements, `0..q`.
    pub fn elements(&self) -> impl Iterator<Item = u8> + '_ {
        0..self.q
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    /// Multiplicative inverse of a nonzero element.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "zero has no multiplicative inverse");
        self.inv[a as usize]
    }

    /// Dot product of two coefficient vectors.
    pub fn dot(&self, a: &[u8], b: &[u8]) -> u8 {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = 0u8;
        for (&x, &y) in a.iter().zip(b) {
            acc = self.add(acc, self.mul(x, y));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axioms(f: &FiniteField) {
        let q = f.order();
        for a in 0..q {
            assert_eq!(f.add(a, 0), a);
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a)), 1, "inverse of {a} in GF({q})");
            }
            for b in 0..q {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in 0..q {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn all_supported_fields_satisfy_axioms() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            axioms(&make_field(q).unwrap());
        }
    }

    #[test]
    fn gf2_characteristic_two() {
        let f = make_field(2).unwrap();
        assert_eq!(f.add(1, 1), 0);
    }

    #[test]
    fn gf4_structure() {
        let f = make_field(4).unwrap();
        for x in f.elements() {
            assert_eq!(f.add(x, x), 0, "char 2: x + x = 0");
        }
        // The multiplicative group is cyclic of order 3.
        let mut pow = 1u8;
        let mut seen = vec![];
        for _ in 0..3 {
            pow = f.mul(pow, 2);
            seen.push(pow);
        }
        seen.sort_unstable();
        assert_eq!(seen, vec![1, 2, 3]);
    }

    #[test]
    fn rejects_non_prime_powers() {
        assert_eq!(make_field(6), Err(FieldError::NotPrimePower(6)));
        assert_eq!(make_field(12), Err(FieldError::NotPrimePower(12)));
        assert_eq!(make_field(1), Err(FieldError::NotPrimePower(1)));
        assert_eq!(make_field(0), Err(FieldError::NotPrimePower(0)));
    }

    #[test]
    fn rejects_oversized_orders() {
        assert_eq!(make_field(17), Err(FieldError::UnsupportedSize(17)));
        assert_eq!(make_field(32), Err(FieldError::UnsupportedSize(32)));
        assert_eq!(make_field(18), Err(FieldError::NotPrimePower(18)));
    }
}
