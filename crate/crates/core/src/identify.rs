//! Identification sequences: how large the sampling set must be, how to draw
//! a sequence, and how to check that it separates a linear span.

use std::fmt::Write as _;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact::{Coefficient, Rational};
use crate::families::{expand_family, FamilyDescriptor, FamilyError};
use crate::poly::{Monomial, QPoly};
use crate::witness::{exact_rank, ExactMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentifyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed sequence text: {0}")]
    Parse(String),
    #[error("families differ in variable count ({0} vs {1})")]
    VariableMismatch(usize, usize),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationSequence {
    pub n: usize,
    pub set_size: u64,
    pub seed: u64,
    pub points: Vec<Vec<i64>>,
}

impl IdentificationSequence {
    /// A sequence with explicit points; `set_size` is one past the largest
    /// coordinate magnitude.
    pub fn from_points(n: usize, points: Vec<Vec<i64>>) -> Self {
        let set_size = points.iter().flatten().map(|x| x.unsigned_abs() + 1).max().unwrap_or(1);
        IdentificationSequence { n, set_size, seed: 0, points }
    }

    pub fn univariate(values: &[i64]) -> Self {
        Self::from_points(1, values.iter().map(|&v| vec![v]).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn rational_points(&self) -> Vec<Vec<Rational>> {
        self.points.iter().map(|p| p.iter().map(|&x| Rational::from(x)).collect()).collect()
    }

    /// Header line `n=.. m=.. set_size=.. seed=..` followed by one point per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("n={} m={} set_size={} seed={}\n", self.n, self.len(), self.set_size, self.seed);
        for p in &self.points {
            let coords: Vec<String> = p.iter().map(i64::to_string).collect();
            let _ = writeln!(out, "{}", coords.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, IdentifyError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| IdentifyError::Parse("missing header".into()))?;
        let mut fields = std::collections::HashMap::new();
        for part in header.split_whitespace() {
            let (k, v) = part.split_once('=').ok_or_else(|| IdentifyError::Parse(format!("bad field {part:?}")))?;
            let v: u64 = v.parse().map_err(|_| IdentifyError::Parse(format!("bad value in {part:?}")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| IdentifyError::Parse(format!("missing {k}")));
        let (n, m) = (get("n")? as usize, get("m")? as usize);
        let points = lines
            .map(|l| {
                let p = l
                    .split_whitespace()
                    .map(|x| x.parse::<i64>().map_err(|_| IdentifyError::Parse(format!("bad coordinate {x:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if p.len() == n {
                    Ok(p)
                } else {
                    Err(IdentifyError::Parse(format!("point {l:?} does not have {n} coordinates")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if points.len() != m {
            return Err(IdentifyError::Parse(format!("header says {m} points, found {}", points.len())));
        }
        Ok(IdentificationSequence { n, set_size: get("set_size")?, seed: get("seed")?, points })
    }
}

/// Smallest integer `N` with `N ≥ Δ³·(1+L)^(1/L)·(1+KΔ)`, decided exactly as
/// `N^L ≥ (1+L)·(Δ³(1+KΔ))^L`.
pub fn required_set_size(delta: u64, l: u32, k: u64) -> Result<BigUint, IdentifyError> {
    if delta < 2 || l < 1 || k < 1 {
        return Err(IdentifyError::InvalidArgument("need delta >= 2, L >= 1, K >= 1".into()));
    }
    let a = BigUint::from(delta).pow(3) * BigUint::from(1 + k * delta);
    let target = BigUint::from(1 + l as u64) * a.pow(l);
    let ok = |n: &BigUint| n.pow(l) >= target;
    // (1+L)^(1/L) ≤ 2, so the answer lies in [a, 2a]
    let (mut lo, mut hi) = (a.clone(), &a * 2u32);
    while lo < hi {
        let mid: BigUint = (&lo + &hi) >> 1;
        if ok(&mid) {
            hi = mid;
        } else {
            lo = mid + 1u32;
        }
    }
    Ok(lo)
}

/// `4L + 2`, the minimal sequence length for circuits of size `L`.
pub fn minimum_length(l: usize) -> usize {
    4 * l + 2
}

pub fn sample_sequence(n: usize, m: usize, set_size: u64, seed: u64) -> Result<IdentificationSequence, IdentifyError> {
    if m == 0 || set_size == 0 {
        return Err(IdentifyError::InvalidArgument("m >= 1 and set_size >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..set_size) as i64).collect()).collect();
    Ok(IdentificationSequence { n, set_size, seed, points })
}

/// Rows are points, columns are monomial values.
pub fn evaluation_matrix(points: &[Vec<Rational>], support: &[Monomial]) -> ExactMatrix<Rational> {
    ExactMatrix::from_rows(
        points
            .iter()
            .map(|p| {
                support
                    .iter()
                    .map(|m| m.0.iter().zip(p).map(|(&e, x)| Coefficient::pow(x, e)).product())
                    .collect()
            })
            .collect(),
    )
}

/// True when the evaluation matrix has full column rank, so two polynomials
/// in the span that agree on every point are equal.
pub fn verify_linear_span(seq: &IdentificationSequence, support: &[Monomial]) -> bool {
    if support.len() > seq.len() {
        return false;
    }
    if support.is_empty() {
        return true;
    }
    exact_rank(&evaluation_matrix(&seq.rational_points(), support)) == support.len()
}

/// Random search for parameter points whose polynomials differ but agree on
/// every point of the sequence.
pub fn falsify_random(
    seq: &IdentificationSequence,
    desc_a: &FamilyDescriptor,
    desc_b: &FamilyDescriptor,
    trials: usize,
    seed: u64,
) -> Result<Option<(Vec<Rational>, Vec<Rational>)>, IdentifyError> {
    let (na, nb) = (desc_a.output_arity(), desc_b.output_arity());
    if na != nb {
        return Err(IdentifyError::VariableMismatch(na, nb));
    }
    let points = seq.rational_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |arity: usize| -> Vec<Rational> { (0..arity).map(|_| Rational::from(rng.gen_range(-3..=3))).collect() };
    for _ in 0..trials {
        let ua = draw(desc_a.param_arity());
        let ub = draw(desc_b.param_arity());
        let fa = expand_family(desc_a, &ua, usize::MAX)?;
        let fb = expand_family(desc_b, &ub, usize::MAX)?;
        if fa == fb {
            continue;
        }
        if agree_on(&fa, &fb, &points) {
            return Ok(Some((ua, ub)));
        }
    }
    Ok(None)
}

fn agree_on(f: &QPoly, g: &QPoly, points: &[Vec<Rational>]) -> bool {
    points.iter().all(|p| f.evaluate(p).ok() == g.evaluate(p).ok())
}

/// Fraction of seeds whose sampled sequence identifies the span.
pub fn identification_rate(n: usize, m: usize, set_size: u64, support: &[Monomial], seeds: u64) -> f64 {
    let hits = (0..seeds)
        .filter(|&s| sample_sequence(n, m, set_size, s).is_ok_and(|seq| verify_linear_span(&seq, support)))
        .count();
    hits as f64 / seeds as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Variant;
    use crate::poly::graded_support;

    #[test]
    fn set_sizes() {
        assert_eq!(required_set_size(2, 2, 4).unwrap(), BigUint::from(125u32));
        assert_eq!(required_set_size(2, 1, 1).unwrap(), BigUint::from(48u32));
        assert_eq!(minimum_length(2), 10);
        assert!(required_set_size(1, 1, 1).is_err());
    }

    #[test]
    fn sampling() {
        let s = sample_sequence(1, 3, 1, 5).unwrap();
        assert_eq!(s.points, vec![vec![0], vec![0], vec![0]]);
        assert_eq!(sample_sequence(3, 7, 50, 9).unwrap(), sample_sequence(3, 7, 50, 9).unwrap());
    }

    #[test]
    fn spans() {
        let quad = graded_support(1, 2);
        assert!(verify_linear_span(&IdentificationSequence::univariate(&[0, 1, 2]), &quad));
        assert!(!verify_linear_span(&IdentificationSequence::univariate(&[0, 1]), &quad));
        assert!(!verify_linear_span(&IdentificationSequence::univariate(&[5, 5, 5]), &graded_support(1, 1)));
    }

    #[test]
    fn text_round_trip() {
        let s = sample_sequence(2, 4, 10, 3).unwrap();
        let text = s.to_text();
        assert!(text.starts_with("n=2 m=4 set_size=10 seed=3\n"));
        assert_eq!(IdentificationSequence::from_text(&text).unwrap(), s);
        assert!(IdentificationSequence::from_text("n=2 m=1 set_size=3 seed=0\n1\n").is_err());
    }

    #[test]
    fn falsifier() {
        let easy = FamilyDescriptor::identity(Variant::EasyPowerSum { l: 1, n: 1 }).unwrap();
        let empty = IdentificationSequence::from_points(1, vec![]);
        assert!(falsify_random(&empty, &easy, &easy, 100, 1).unwrap().is_some());
        let d2 = FamilyDescriptor::identity(Variant::UnivariateD { d: 2 }).unwrap();
        let ten = IdentificationSequence::univariate(&(0..10).collect::<Vec<_>>());
        assert_eq!(falsify_random(&ten, &d2, &d2, 10_000, 2).unwrap(), None);
    }
}
