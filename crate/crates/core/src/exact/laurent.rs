use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Coefficient, ExactError, Rational};

pub const DEFAULT_PRECISION: usize = 8;

/// Truncated Laurent series `Σ c_i ε^(v+i)` with an optional error term.
///
/// `order = None` means the stored terms are the whole series. `order = Some(k)`
/// means the series is only known modulo `O(ε^k)`; in that case `coeffs` holds
/// every known coefficient from `valuation` up to `k − 1`. At most `precision`
/// coefficients are kept; anything beyond is dropped into the error term.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedLaurent {
    valuation: i64,
    coeffs: Vec<Rational>,
    order: Option<i64>,
    precision: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaurentOp {
    Add,
    Sub,
    Mul,
}

impl TruncatedLaurent {
    pub fn zero(precision: usize) -> Self {
        Self::build(0, Vec::new(), None, precision)
    }

    pub fn constant(value: Rational, precision: usize) -> Self {
        Self::build(0, vec![value], None, precision)
    }

    pub fn monomial(coeff: Rational, exponent: i64, precision: usize) -> Self {
        Self::build(exponent, vec![coeff], None, precision)
    }

    /// `ε` itself.
    pub fn epsilon(precision: usize) -> Self {
        Self::monomial(Rational::one(), 1, precision)
    }

    /// Exact series from `(exponent, coefficient)` pairs; repeated exponents add.
    pub fn from_terms(terms: &[(i64, Rational)], precision: usize) -> Self {
        let mut acc = Self::zero(precision);
        for (e, c) in terms {
            acc = acc + Self::monomial(c.clone(), *e, precision);
        }
        acc
    }

    /// The pure error term `O(ε^order)`.
    pub fn big_o(order: i64, precision: usize) -> Self {
        Self::build(order, Vec::new(), Some(order), precision)
    }

    fn build(valuation: i64, coeffs: Vec<Rational>, order: Option<i64>, precision: usize) -> Self {
        assert!(precision >= 1, "precision must be positive");
        let mut s = TruncatedLaurent { valuation, coeffs, order, precision };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.valuation = self.order.unwrap_or(0);
                return;
            }
            Some(k) => {
                self.coeffs.drain(..k);
                self.valuation += k as i64;
            }
        }
        match self.order {
            None => {
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
                if self.coeffs.len() > self.precision {
                    self.coeffs.truncate(self.precision);
                    self.order = Some(self.valuation + self.precision as i64);
                }
            }
            Some(order) => {
                let known = (order - self.valuation).max(0) as usize;
                let keep = known.min(self.precision);
                self.coeffs.resize(keep, Rational::zero());
                if keep < known {
                    self.order = Some(self.valuation + keep as i64);
                }
                if self.coeffs.iter().all(|c| c.is_zero()) {
                    self.coeffs.clear();
                    self.valuation = self.order.unwrap_or(0);
                }
            }
        }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn with_precision(&self, precision: usize) -> Self {
        Self::build(self.valuation, self.coeffs.clone(), self.order, precision)
    }

    /// Exponent of the leading nonzero term; `None` for a series with no known term.
    pub fn lowest_exponent(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.valuation)
        }
    }

    pub fn order(&self) -> Option<i64> {
        self.order
    }

    pub fn is_exact(&self) -> bool {
        self.order.is_none()
    }

    pub fn significant_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `ε^exponent`, or `None` when it lies inside the error term.
    pub fn coefficient(&self, exponent: i64) -> Option<Rational> {
        if let Some(o) = self.order {
            if exponent >= o {
                return None;
            }
        }
        let idx = exponent - self.valuation;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Some(Rational::zero())
        } else {
            Some(self.coeffs[idx as usize].clone())
        }
    }

    /// Nonzero known terms in increasing exponent order.
    pub fn terms(&self) -> Vec<(i64, Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.valuation + i as i64, c.clone()))
            .collect()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.order.is_none()
    }

    /// Sum of the known terms at a nonzero rational `ε`.
    pub fn substitute(&self, eps: &Rational) -> Result<Rational, ExactError> {
        if eps.is_zero() {
            if self.valuation < 0 && !self.coeffs.is_empty() {
                return Err(ExactError::PoleAtSubstitution { exponent: self.valuation });
            }
            return laurent_limit(self);
        }
        let mut acc = Rational::zero();
        for (e, c) in self.terms() {
            acc += &(c * eps.powi(e as i32)?);
        }
        Ok(acc)
    }

    fn end(&self) -> Option<i64> {
        self.order
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl Add for TruncatedLaurent {
    type Output = TruncatedLaurent;

    fn add(self, rhs: TruncatedLaurent) -> TruncatedLaurent {
        let precision = self.precision.min(rhs.precision);
        if self.is_exact_zero() {
            return rhs.with_precision(precision);
        }
        if rhs.is_exact_zero() {
            return self.with_precision(precision);
        }
        let order = min_opt(self.end(), rhs.end());
        let lo = self.valuation.min(rhs.valuation);
        let hi_a = self.valuation + self.coeffs.len() as i64;
        let hi_b = rhs.valuation + rhs.coeffs.len() as i64;
        let mut hi = hi_a.max(hi_b);
        if let Some(o) = order {
            hi = hi.min(o);
        }
        let len = (hi - lo).max(0) as usize;
        let mut coeffs = vec![Rational::zero(); len];
        for s in [&self, &rhs] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let idx = s.valuation + i as i64 - lo;
                if (idx as usize) < len {
                    coeffs[idx as usize] += c;
                }
            }
        }
        TruncatedLaurent::build(lo, coeffs, order, precision)
    }
}

impl Neg for TruncatedLaurent {
    type Output = TruncatedLaurent;

    fn neg(mut self) -> TruncatedLaurent {
        for c in &mut self.coeffs {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for TruncatedLaurent {
    type Output = TruncatedLaurent;

    fn sub(self, rhs: TruncatedLaurent) -> TruncatedLaurent {
        self + (-rhs)
    }
}

impl Mul for TruncatedLaurent {
    type Output = TruncatedLaurent;

    fn mul(self, rhs: TruncatedLaurent) -> TruncatedLaurent {
        let precision = self.precision.min(rhs.precision);
        if self.is_exact_zero() || rhs.is_exact_zero() {
            return TruncatedLaurent::zero(precision);
        }
        let valuation = self.valuation + rhs.valuation;
        // The error of a·b is bounded by the error of each factor times the
        // leading term of the other.
        let order = min_opt(
            self.order.map(|o| o + rhs.valuation),
            rhs.order.map(|o| o + self.valuation),
        );
        let mut len = self.coeffs.len() + rhs.coeffs.len();
        len = len.saturating_sub(1);
        if let Some(o) = order {
            len = len.min((o - valuation).max(0) as usize);
        }
        let mut coeffs = vec![Rational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += &(a * b);
            }
        }
        TruncatedLaurent::build(valuation, coeffs, order, precision)
    }
}

/// Checked arithmetic: fails when nothing significant survives the operation.
pub fn laurent_arith(
    a: &TruncatedLaurent,
    b: &TruncatedLaurent,
    op: LaurentOp,
) -> Result<TruncatedLaurent, ExactError> {
    let (a, b) = (a.clone(), b.clone());
    let out = match op {
        LaurentOp::Add => a + b,
        LaurentOp::Sub => a - b,
        LaurentOp::Mul => a * b,
    };
    match out.order {
        Some(order) if out.coeffs.is_empty() => Err(ExactError::PrecisionUnderflow { order }),
        _ => Ok(out),
    }
}

/// The value at `ε = 0` of a series holomorphic at the origin.
pub fn laurent_limit(a: &TruncatedLaurent) -> Result<Rational, ExactError> {
    if let Some(e) = a.lowest_exponent() {
        if e < 0 {
            return Err(ExactError::NotHolomorphicAtOrigin { exponent: e });
        }
    }
    match a.coefficient(0) {
        Some(c) => Ok(c),
        None => Err(ExactError::PrecisionUnderflow { order: a.order.unwrap_or(0) }),
    }
}

impl Coefficient for TruncatedLaurent {
    fn zero_like(&self) -> Self {
        TruncatedLaurent::zero(self.precision)
    }

    fn one_like(&self) -> Self {
        TruncatedLaurent::constant(Rational::one(), self.precision)
    }

    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }

    fn from_rational_like(&self, value: &Rational) -> Result<Self, ExactError> {
        Ok(TruncatedLaurent::constant(value.clone(), self.precision))
    }

    fn div_integer(&self, divisor: u64) -> Result<Self, ExactError> {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.div_integer(divisor)?;
        }
        Ok(out)
    }
}

impl fmt::Display for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() && self.order.is_none() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*eps")?,
                _ => write!(f, "{c}*eps^{e}")?,
            }
        }
        if let Some(o) = self.order {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "O(eps^{o})")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct LaurentRepr {
    terms: Vec<(i64, Rational)>,
    order: Option<i64>,
    precision: usize,
}

impl Serialize for TruncatedLaurent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        LaurentRepr { terms: self.terms(), order: self.order, precision: self.precision }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruncatedLaurent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = LaurentRepr::deserialize(deserializer)?;
        if r.precision == 0 {
            return Err(serde::de::Error::custom("precision must be positive"));
        }
        let mut s = TruncatedLaurent::from_terms(&r.terms, r.precision);
        if let Some(o) = r.order {
            s = s + TruncatedLaurent::big_o(o, r.precision);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn series(terms: &[(i64, i64)]) -> TruncatedLaurent {
        let t: Vec<_> = terms.iter().map(|&(e, c)| (e, Rational::from(c))).collect();
        TruncatedLaurent::from_terms(&t, DEFAULT_PRECISION)
    }

    #[test]
    fn telescoping_product() {
        let a = series(&[(-1, 1), (0, 1)]);
        let eps = TruncatedLaurent::epsilon(DEFAULT_PRECISION);
        let p = laurent_arith(&a, &eps, LaurentOp::Mul).unwrap();
        assert_eq!(p, series(&[(0, 1), (1, 1)]));
    }

    #[test]
    fn cancellation_to_constant() {
        let s = laurent_arith(&series(&[(0, 1), (1, 1)]), &series(&[(0, 1), (1, -1)]), LaurentOp::Add)
            .unwrap();
        assert_eq!(s, series(&[(0, 2)]));
        assert_eq!(s.lowest_exponent(), Some(0));
    }

    #[test]
    fn monomial_product() {
        let a = TruncatedLaurent::monomial(q(1, 2), -1, 8);
        let b = TruncatedLaurent::monomial(q(2, 1), 2, 8);
        assert_eq!(a * b, TruncatedLaurent::epsilon(8));
    }

    #[test]
    fn limits() {
        assert_eq!(laurent_limit(&series(&[(0, 3), (1, 2)])).unwrap(), Rational::from(3));
        assert_eq!(laurent_limit(&TruncatedLaurent::zero(8)).unwrap(), Rational::zero());
        assert_eq!(
            laurent_limit(&series(&[(-1, 1), (0, 1)])),
            Err(ExactError::NotHolomorphicAtOrigin { exponent: -1 })
        );
        assert_eq!(laurent_limit(&series(&[(2, 5)])).unwrap(), Rational::zero());
    }

    #[test]
    fn truncation_tracks_order() {
        let one_plus_eps = TruncatedLaurent::from_terms(&[(0, q(1, 1)), (1, q(1, 1))], 3);
        let cube = one_plus_eps.clone() * one_plus_eps.clone() * one_plus_eps;
        assert_eq!(cube.order(), Some(3));
        assert_eq!(cube.coefficient(2), Some(Rational::from(3)));
        assert_eq!(cube.coefficient(3), None);
    }

    #[test]
    fn underflow_is_reported() {
        let a = TruncatedLaurent::from_terms(&[(0, q(1, 1)), (5, q(1, 1))], 2);
        assert_eq!(a.order(), Some(2));
        let b = TruncatedLaurent::constant(q(1, 1), 2);
        let err = laurent_arith(&a, &b, LaurentOp::Sub).unwrap_err();
        assert_eq!(err, ExactError::PrecisionUnderflow { order: 2 });
    }

    #[test]
    fn pole_cancellation_loses_precision_explicitly() {
        // (1/eps)·(eps + eps^2 + O(eps^3)) = 1 + eps + O(eps^2)
        let inner = TruncatedLaurent::from_terms(&[(1, q(1, 1)), (2, q(1, 1))], 8)
            + TruncatedLaurent::big_o(3, 8);
        let p = TruncatedLaurent::monomial(q(1, 1), -1, 8) * inner;
        assert_eq!(p.order(), Some(2));
        assert_eq!(laurent_limit(&p).unwrap(), Rational::one());
    }

    #[test]
    fn substitution_and_serde() {
        let s = series(&[(-1, 1), (0, 1)]);
        assert_eq!(s.substitute(&q(1, 2)).unwrap(), Rational::from(3));
        assert!(s.substitute(&Rational::zero()).is_err());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"terms":[[-1,"1/1"],[0,"1/1"]],"order":null,"precision":8}"#);
        let back: TruncatedLaurent = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
