//! Exact scalar backends: rationals, prime fields and truncated Laurent series
//! in one indeterminate `ε`.
//!
//! Every backend implements [`Coefficient`], which is what polynomials,
//! circuits and matrices are generic over.

mod laurent;
mod prime;
mod rational;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use laurent::{laurent_arith, laurent_limit, LaurentOp, TruncatedLaurent, DEFAULT_PRECISION};
pub use prime::{is_prime, modular_root_of_unity, prime_for_roots_of_unity, PrimeFieldElement};
pub use rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("series has a pole at the origin (nonzero coefficient at exponent {exponent})")]
    NotHolomorphicAtOrigin { exponent: i64 },
    #[error("precision underflow: no significant term below O(eps^{order}); raise the precision and retry")]
    PrecisionUnderflow { order: i64 },
    #[error("no element of order {order} exists modulo {modulus}")]
    NoSuchRoot { modulus: u64, order: u64 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{divisor} is not invertible modulo {modulus}")]
    NotInvertible { modulus: u64, divisor: String },
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
    #[error("substitution at a pole (eps = 0, lowest exponent {exponent})")]
    PoleAtSubstitution { exponent: i64 },
}

/// A commutative ring with exact arithmetic.
///
/// Constants are created relative to an existing element (`*_like`), because
/// some backends carry context (a modulus, a precision, a variable count).
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational_like(&self, value: &Rational) -> Result<Self, ExactError>;
    /// Exact division by a positive integer, when the ring supports it.
    fn div_integer(&self, divisor: u64) -> Result<Self, ExactError>;

    fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            exp >>= 1;
            if exp > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn from_i64_like(&self, value: i64) -> Self {
        self.from_rational_like(&Rational::from(value))
            .expect("integers embed in every coefficient ring")
    }
}

/// A [`Coefficient`] ring in which every nonzero element is invertible.
pub trait Field: Coefficient {
    fn inverse(&self) -> Result<Self, ExactError>;

    fn divide(&self, other: &Self) -> Result<Self, ExactError> {
        Ok(self.clone() * other.inverse()?)
    }
}

impl Field for Rational {
    fn inverse(&self) -> Result<Self, ExactError> {
        self.recip()
    }
}

impl Field for PrimeFieldElement {
    fn inverse(&self) -> Result<Self, ExactError> {
        PrimeFieldElement::inverse(self)
    }
}
