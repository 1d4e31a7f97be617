//! Sparse multivariate polynomials over any [`Coefficient`] ring.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exact::{Coefficient, ExactError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("arity mismatch: expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("term {monomial} lies outside the support")]
    TermOutsideSupport { monomial: String },
    #[error("variable index {index} out of range for {count} variables")]
    VariableOutOfRange { index: usize, count: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Exponent tuple, one entry per variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&default_names(self.nvars())))
    }
}

pub fn default_names(nvars: usize) -> Vec<String> {
    if nvars == 1 {
        vec!["X".to_string()]
    } else {
        (1..=nvars).map(|i| format!("X{i}")).collect()
    }
}

/// Graded order: total degree ascending, ties broken by descending exponent tuple
/// (so `X1^2 < X1*X2 < X2^2`).
pub fn graded_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| b.0.cmp(&a.0))
}

/// All monomials in `nvars` variables of total degree `≤ max_degree`, graded order.
pub fn graded_support(nvars: usize, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        out.extend(monomials_of_degree(nvars, d));
    }
    out
}

/// Monomials of exact total degree `d`, descending exponent tuple.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    rec(nvars, d, &mut Vec::new(), &mut out);
    out
}

/// Sort a support into graded order and drop duplicates.
pub fn canonical_support(mut support: Vec<Monomial>) -> Vec<Monomial> {
    support.sort_by(graded_cmp);
    support.dedup();
    support
}

/// Sparse polynomial. `ring` is the zero element of the coefficient ring and
/// carries whatever context the ring needs (modulus, precision, ...).
#[derive(Clone, PartialEq)]
pub struct Polynomial<R> {
    nvars: usize,
    terms: BTreeMap<Monomial, R>,
    ring: R,
}

pub type QPoly = Polynomial<Rational>;

impl<R: Coefficient> Polynomial<R> {
    pub fn zero(nvars: usize, ring: &R) -> Self {
        Polynomial { nvars, terms: BTreeMap::new(), ring: ring.zero_like() }
    }

    pub fn constant(nvars: usize, value: R) -> Self {
        let mut p = Self::zero(nvars, &value);
        p.add_term(Monomial::one(nvars), value);
        p
    }

    pub fn var(nvars: usize, index: usize, ring: &R) -> Self {
        let mut p = Self::zero(nvars, ring);
        p.add_term(Monomial::var(nvars, index), ring.one_like());
        p
    }

    pub fn from_terms(nvars: usize, ring: &R, terms: impl IntoIterator<Item = (Monomial, R)>) -> Self {
        let mut p = Self::zero(nvars, ring);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    /// Univariate polynomial from ascending coefficients.
    pub fn univariate(ring: &R, coeffs: &[R]) -> Self {
        Self::from_terms(
            1,
            ring,
            coeffs.iter().enumerate().map(|(i, c)| (Monomial(vec![i as u32]), c.clone())),
        )
    }

    pub fn add_term(&mut self, m: Monomial, c: R) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R)> {
        self.terms.iter()
    }

    /// Terms in graded order.
    pub fn graded_terms(&self) -> Vec<(Monomial, R)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| graded_cmp(&a.0, &b.0));
        v
    }

    pub fn coefficient(&self, m: &Monomial) -> R {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero_like())
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).max()
    }

    pub fn support(&self) -> Vec<Monomial> {
        canonical_support(self.terms.keys().cloned().collect())
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut p = Self::zero(self.nvars, &self.ring);
        for (m, a) in &self.terms {
            p.add_term(m.clone(), a.clone() * c.clone());
        }
        p
    }

    pub fn map_coefficients<S: Coefficient>(
        &self,
        ring: &S,
        mut f: impl FnMut(&R) -> S,
    ) -> Polynomial<S> {
        let mut p = Polynomial::zero(self.nvars, ring);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), f(c));
        }
        p
    }

    pub fn evaluate(&self, point: &[R]) -> Result<R, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch { expected: self.nvars, got: point.len() });
        }
        let mut powers: Vec<Vec<R>> = Vec::with_capacity(self.nvars);
        for (i, x) in point.iter().enumerate() {
            let maxd = self.degree_in(i).unwrap_or(0) as usize;
            let mut pw = vec![x.one_like()];
            for k in 1..=maxd {
                pw.push(pw[k - 1].clone() * x.clone());
            }
            powers.push(pw);
        }
        let mut acc = self.ring.zero_like();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t * powers[i][e as usize].clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Substitute ring values for a subset of variables and drop them.
    /// `assign[i] = Some(v)` fixes variable `i`; the rest keep their order.
    pub fn partial_evaluate(&self, assign: &[Option<R>]) -> Result<Self, PolyError> {
        if assign.len() != self.nvars {
            return Err(PolyError::ArityMismatch { expected: self.nvars, got: assign.len() });
        }
        let keep: Vec<usize> = (0..self.nvars).filter(|&i| assign[i].is_none()).collect();
        let mut p = Self::zero(keep.len(), &self.ring);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, a) in assign.iter().enumerate() {
                if let Some(v) = a {
                    t = t * v.pow(m.0[i]);
                }
            }
            p.add_term(Monomial(keep.iter().map(|&i| m.0[i]).collect()), t);
        }
        Ok(p)
    }

    pub fn derivative(&self, var: usize) -> Result<Self, PolyError> {
        self.check_var(var)?;
        let mut p = Self::zero(self.nvars, &self.ring);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] = e - 1;
            p.add_term(m2, c.clone() * c.from_i64_like(e as i64));
        }
        Ok(p)
    }

    pub fn integral(&self, var: usize) -> Result<Self, PolyError> {
        self.check_var(var)?;
        let mut p = Self::zero(self.nvars, &self.ring);
        for (m, c) in &self.terms {
            let e = m.0[var] + 1;
            let mut m2 = m.clone();
            m2.0[var] = e;
            p.add_term(m2, c.div_integer(e as u64)?);
        }
        Ok(p)
    }

    pub fn coeff_vector(&self, support: &[Monomial]) -> Result<Vec<R>, PolyError> {
        for m in self.terms.keys() {
            if !support.contains(m) {
                return Err(PolyError::TermOutsideSupport { monomial: m.to_string() });
            }
        }
        Ok(support.iter().map(|m| self.coefficient(m)).collect())
    }

    pub fn from_coeff_vector(nvars: usize, ring: &R, support: &[Monomial], coeffs: &[R]) -> Self {
        assert_eq!(support.len(), coeffs.len(), "support/coefficient length");
        Self::from_terms(nvars, ring, support.iter().cloned().zip(coeffs.iter().cloned()))
    }

    fn check_var(&self, var: usize) -> Result<(), PolyError> {
        if var >= self.nvars {
            Err(PolyError::VariableOutOfRange { index: var, count: self.nvars })
        } else {
            Ok(())
        }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let terms = self.graded_terms();
        if terms.is_empty() {
            return "0".to_string();
        }
        terms
            .iter()
            .map(|(m, c)| {
                if m.degree() == 0 {
                    format!("{c}")
                } else if c == &c.one_like() {
                    m.display_with(names)
                } else {
                    format!("{c}*{}", m.display_with(names))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl QPoly {
    pub fn zero_q(nvars: usize) -> Self {
        Polynomial::zero(nvars, &Rational::zero())
    }

    pub fn var_q(nvars: usize, index: usize) -> Self {
        Polynomial::var(nvars, index, &Rational::zero())
    }

    pub fn constant_q(nvars: usize, value: Rational) -> Self {
        Polynomial::constant(nvars, value)
    }

    /// Univariate polynomial from ascending integer coefficients.
    pub fn univariate_i64(coeffs: &[i64]) -> Self {
        let c: Vec<Rational> = coeffs.iter().map(|&x| Rational::from(x)).collect();
        Polynomial::univariate(&Rational::zero(), &c)
    }

    /// Max-abs coefficient difference.
    pub fn max_coeff_distance(&self, other: &QPoly) -> Rational {
        let diff = self.clone() - other.clone();
        diff.terms().map(|(_, c)| c.abs()).max().unwrap_or_else(Rational::zero)
    }
}

impl<R: Coefficient> fmt::Display for Polynomial<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&default_names(self.nvars)))
    }
}

impl<R: Coefficient> fmt::Debug for Polynomial<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.nvars, self)
    }
}

impl<R: Coefficient> Add for Polynomial<R> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.nvars, rhs.nvars);
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<R: Coefficient> Neg for Polynomial<R> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl<R: Coefficient> Sub for Polynomial<R> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<R: Coefficient> Mul for Polynomial<R> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.nvars, rhs.nvars);
        let mut p = Self::zero(self.nvars, &self.ring);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                p.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        p
    }
}

impl<R: Coefficient> Coefficient for Polynomial<R> {
    fn zero_like(&self) -> Self {
        Self::zero(self.nvars, &self.ring)
    }

    fn one_like(&self) -> Self {
        Self::constant(self.nvars, self.ring.one_like())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_rational_like(&self, value: &Rational) -> Result<Self, ExactError> {
        Ok(Self::constant(self.nvars, self.ring.from_rational_like(value)?))
    }

    fn div_integer(&self, divisor: u64) -> Result<Self, ExactError> {
        let mut p = Self::zero(self.nvars, &self.ring);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c.div_integer(divisor)?);
        }
        Ok(p)
    }
}

impl<R: Coefficient + Serialize> Serialize for Polynomial<R> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<(&Vec<u32>, &R)> = {
            let mut v: Vec<_> = self.terms.iter().collect();
            v.sort_by(|a, b| graded_cmp(a.0, b.0));
            v.into_iter().map(|(m, c)| (&m.0, c)).collect()
        };
        let mut s = serializer.serialize_struct("Polynomial", 2)?;
        s.serialize_field("variables", &self.nvars)?;
        s.serialize_field("terms", &terms)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for QPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            variables: usize,
            terms: Vec<(Vec<u32>, Rational)>,
        }
        let r = Repr::deserialize(deserializer)?;
        if r.terms.iter().any(|(e, _)| e.len() != r.variables) {
            return Err(serde::de::Error::custom("exponent tuple length differs from variable count"));
        }
        Ok(QPoly::from_terms(
            r.variables,
            &Rational::zero(),
            r.terms.into_iter().map(|(e, c)| (Monomial(e), c)),
        ))
    }
}
