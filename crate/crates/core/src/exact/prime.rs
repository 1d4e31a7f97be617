use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::{Coefficient, ExactError, Rational};

/// Element of the prime field with `modulus` elements.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeFieldElement {
    residue: u64,
    modulus: u64,
}

impl PrimeFieldElement {
    /// Caller guarantees `modulus` is prime; see [`PrimeFieldElement::checked`].
    pub fn new(value: i64, modulus: u64) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        let residue = value.rem_euclid(modulus as i64) as u64;
        PrimeFieldElement { residue, modulus }
    }

    pub fn checked(value: i64, modulus: u64) -> Result<Self, ExactError> {
        if !is_prime(modulus) {
            return Err(ExactError::NotPrime(modulus));
        }
        Ok(Self::new(value, modulus))
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn pow_u64(&self, mut exp: u64) -> Self {
        let mut base = self.residue as u128;
        let m = self.modulus as u128;
        let mut acc: u128 = 1 % m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            exp >>= 1;
        }
        PrimeFieldElement { residue: acc as u64, modulus: self.modulus }
    }

    pub fn inverse(&self) -> Result<Self, ExactError> {
        if self.residue == 0 {
            return Err(ExactError::NotInvertible {
                modulus: self.modulus,
                divisor: "0".into(),
            });
        }
        Ok(self.pow_u64(self.modulus - 2))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ExactError> {
        Ok(*self * other.inverse()?)
    }

    fn same_field(&self, other: &Self) {
        debug_assert_eq!(self.modulus, other.modulus, "mixed prime fields");
    }

    fn big_to_residue(value: &BigInt, modulus: u64) -> u64 {
        value
            .mod_floor(&BigInt::from(modulus))
            .to_u64()
            .expect("residue fits in u64")
    }
}

impl fmt::Display for PrimeFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.residue, self.modulus)
    }
}

impl fmt::Debug for PrimeFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for PrimeFieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.same_field(&rhs);
        let r = (self.residue as u128 + rhs.residue as u128) % self.modulus as u128;
        PrimeFieldElement { residue: r as u64, modulus: self.modulus }
    }
}

impl Sub for PrimeFieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for PrimeFieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.same_field(&rhs);
        let r = (self.residue as u128 * rhs.residue as u128) % self.modulus as u128;
        PrimeFieldElement { residue: r as u64, modulus: self.modulus }
    }
}

impl Neg for PrimeFieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        let r = if self.residue == 0 { 0 } else { self.modulus - self.residue };
        PrimeFieldElement { residue: r, modulus: self.modulus }
    }
}

impl Coefficient for PrimeFieldElement {
    fn zero_like(&self) -> Self {
        PrimeFieldElement { residue: 0, modulus: self.modulus }
    }

    fn one_like(&self) -> Self {
        PrimeFieldElement { residue: 1, modulus: self.modulus }
    }

    fn is_zero(&self) -> bool {
        self.residue == 0
    }

    fn from_rational_like(&self, value: &Rational) -> Result<Self, ExactError> {
        let m = self.modulus;
        let num = PrimeFieldElement { residue: Self::big_to_residue(value.numer(), m), modulus: m };
        let den = PrimeFieldElement { residue: Self::big_to_residue(value.denom(), m), modulus: m };
        if den.residue == 0 {
            return Err(ExactError::NotInvertible { modulus: m, divisor: value.denom().to_string() });
        }
        Ok(num * den.inverse()?)
    }

    fn div_integer(&self, divisor: u64) -> Result<Self, ExactError> {
        let d = PrimeFieldElement { residue: divisor % self.modulus, modulus: self.modulus };
        if d.residue == 0 {
            return Err(ExactError::NotInvertible {
                modulus: self.modulus,
                divisor: divisor.to_string(),
            });
        }
        self.div(&d)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest element of multiplicative order exactly `order` modulo the prime `p`.
pub fn modular_root_of_unity(p: u64, order: u64) -> Result<PrimeFieldElement, ExactError> {
    if !is_prime(p) {
        return Err(ExactError::NotPrime(p));
    }
    if order == 0 || (p - 1) % order != 0 {
        return Err(ExactError::NoSuchRoot { modulus: p, order });
    }
    let factors = prime_factors(order);
    for g in 1..p {
        let x = PrimeFieldElement::new(g as i64, p);
        if x.pow_u64(order).residue != 1 {
            continue;
        }
        if factors.iter().all(|q| x.pow_u64(order / q).residue != 1) {
            return Ok(x);
        }
    }
    Err(ExactError::NoSuchRoot { modulus: p, order })
}

/// Smallest prime `p ≡ 1 (mod order)`. Such a prime always exceeds `order`, so
/// every integer in `1..=order` stays invertible in the field.
pub fn prime_for_roots_of_unity(order: u64) -> u64 {
    assert!(order >= 1);
    let mut p = order + 1;
    loop {
        if is_prime(p) {
            return p;
        }
        p += order;
    }
}
