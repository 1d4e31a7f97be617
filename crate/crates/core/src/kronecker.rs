//! Kronecker sums and products of square rational matrices, and exact
//! characteristic polynomials.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::exact::Rational;
use crate::families::{diagonal_values, product_of_linear_factors};
use crate::poly::{Monomial, QPoly};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KroneckerError {
    #[error("k = {k} exceeds the cap {cap}")]
    CapExceeded { k: usize, cap: usize },
    #[error("expected {expected} parameters, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("rows do not form a square matrix")]
    NotSquare,
}

pub const DEFAULT_THETA_CAP: usize = 8;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, entries: vec![Rational::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![Rational::one(); n])
    }

    pub fn diag(values: &[Rational]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.entries[i * m.n + i] = v.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, KroneckerError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(KroneckerError::NotSquare);
        }
        Ok(SquareMatrix { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.n.max(1)).take(self.n).map(<[Rational]>::to_vec).collect()
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        SquareMatrix { n: self.n, entries: self.entries.iter().map(|x| x * c).collect() }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn diagonal(&self) -> Vec<Rational> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }
}

impl Add for &SquareMatrix {
    type Output = SquareMatrix;

    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        SquareMatrix { n: self.n, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect() }
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;

    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * n + j] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<Rational>>::deserialize(d)?;
        SquareMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Block matrix `(a_ij · B)`.
pub fn kron_product(a: &SquareMatrix, b: &SquareMatrix) -> SquareMatrix {
    let (n, m) = (a.n, b.n);
    let mut out = SquareMatrix::zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            let aij = a.get(i, j);
            if aij.is_zero() {
                continue;
            }
            for k in 0..m {
                for l in 0..m {
                    out.entries[(i * m + k) * n * m + j * m + l] = aij * b.get(k, l);
                }
            }
        }
    }
    out
}

/// `A ⊗ Id_m + Id_n ⊗ B`.
pub fn kron_sum(a: &SquareMatrix, b: &SquareMatrix) -> SquareMatrix {
    &kron_product(a, &SquareMatrix::identity(b.n)) + &kron_product(&SquareMatrix::identity(a.n), b)
}

/// `det(Y·Id − A)` by the Faddeev–LeVerrier recurrence:
/// `M_1 = Id`, `c_{n−k} = −tr(A·M_k)/k`, `M_{k+1} = A·M_k + c_{n−k}·Id`.
pub fn char_poly(a: &SquareMatrix) -> QPoly {
    let n = a.n;
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let id = SquareMatrix::identity(n);
    let mut m = id.clone();
    for k in 1..=n {
        let am = a * &m;
        let ck = -(am.trace() / Rational::from(k as i64));
        m = &am + &id.scale(&ck);
        c[n - k] = ck;
    }
    QPoly::univariate(&Rational::zero(), &c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct OpCount {
    pub kron_sums: usize,
    pub kron_products: usize,
    pub scalar_mults: usize,
    pub additions: usize,
}

impl OpCount {
    pub fn total(&self) -> usize {
        self.kron_sums + self.kron_products + self.scalar_mults + self.additions
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaMatrix {
    pub matrix: SquareMatrix,
    pub ops: OpCount,
}

fn two_by_two(a: Rational, b: Rational) -> SquareMatrix {
    SquareMatrix::diag(&[a, b])
}

fn check_theta_args(k: usize, u: &[Rational], cap: usize) -> Result<(), KroneckerError> {
    if k > cap {
        return Err(KroneckerError::CapExceeded { k, cap });
    }
    if u.len() != k {
        return Err(KroneckerError::ArityMismatch { expected: k, got: u.len() });
    }
    Ok(())
}

/// `diag(0, 2^(k−1)) ⊕ ⋯ ⊕ diag(0, 1)`.
fn shift_sum(k: usize, ops: &mut OpCount) -> SquareMatrix {
    let block = |i: usize| two_by_two(Rational::zero(), Rational::from(1i64 << (k - i)));
    let mut acc = block(1);
    for i in 2..=k {
        acc = kron_sum(&acc, &block(i));
        ops.kron_sums += 1;
    }
    acc
}

/// `diag(1, u_k) ⊗ ⋯ ⊗ diag(1, u_1)`.
fn direction_product(u: &[Rational], ops: &mut OpCount) -> SquareMatrix {
    let k = u.len();
    let block = |i: usize| two_by_two(Rational::one(), u[i - 1].clone());
    let mut acc = block(k);
    for i in (1..k).rev() {
        acc = kron_product(&acc, &block(i));
        ops.kron_products += 1;
    }
    acc
}

pub fn build_theta_matrix(k: usize, s: &Rational, u: &[Rational], cap: usize) -> Result<ThetaMatrix, KroneckerError> {
    check_theta_args(k, u, cap)?;
    if k == 0 {
        return Err(KroneckerError::CapExceeded { k, cap: 0 });
    }
    let mut ops = OpCount::default();
    let shifts = shift_sum(k, &mut ops);
    let product = direction_product(u, &mut ops).scale(s);
    ops.scalar_mults += 1;
    let matrix = &shifts + &product;
    ops.additions += 1;
    Ok(ThetaMatrix { matrix, ops })
}

/// Checks the diagonal-sum identity, the diagonal-product identity and the
/// characteristic polynomial factorization.
pub fn verify_lemma_identities(k: usize, s: &Rational, u: &[Rational]) -> Result<(bool, bool, bool), KroneckerError> {
    check_theta_args(k, u, 5)?;
    let mut ops = OpCount::default();
    let range: Vec<Rational> = (0..1i64 << k).map(Rational::from).collect();
    let first = shift_sum(k, &mut ops) == SquareMatrix::diag(&range);

    let monomials: Vec<Rational> = (0..1usize << k)
        .map(|j| (0..k).filter(|i| (j >> i) & 1 == 1).map(|i| u[i].clone()).product())
        .collect();
    let second = direction_product(u, &mut ops) == SquareMatrix::diag(&monomials);

    let theta = build_theta_matrix(k, s, u, DEFAULT_THETA_CAP)?;
    let expected = product_of_linear_factors(&Rational::zero(), &diagonal_values(k, s, u));
    let third = char_poly(&theta.matrix) == expected;
    Ok((first, second, third))
}

/// Coefficient of `Y^e` in a univariate polynomial.
pub fn coefficient_of(p: &QPoly, e: u32) -> Rational {
    p.coefficient(&Monomial(vec![e]))
}
