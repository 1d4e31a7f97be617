use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::exact::{Field, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("inconsistent system: the data is not explained by the declared support")]
    InconsistentSystem,
    #[error("underdetermined system: rank {rank} < {unknowns} unknowns")]
    UnderdeterminedSystem { rank: usize, unknowns: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense row-major matrix over a field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactMatrix<F> {
    rows: usize,
    cols: usize,
    entries: Vec<F>,
}

impl<F: Field> ExactMatrix<F> {
    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        ExactMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Rank by fraction-free elimination: each update is
    /// `(pivot·a_ij − a_ic·a_rj) / previous_pivot`.
    pub fn rank(&self) -> usize {
        bareiss(self.to_rows()).0
    }

    pub fn determinant(&self) -> Option<F> {
        if self.rows != self.cols {
            return None;
        }
        if self.rows == 0 {
            return None;
        }
        let (rank, last, swaps) = bareiss(self.to_rows());
        if rank < self.rows {
            return Some(self.get(0, 0).zero_like());
        }
        let last = last.expect("full rank has a pivot");
        Some(if swaps % 2 == 1 { -last } else { last })
    }
}

/// Returns `(rank, last pivot, row swaps)`.
fn bareiss<F: Field>(mut m: Vec<Vec<F>>) -> (usize, Option<F>, usize) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let Some(sample) = m.first().and_then(|r| r.first()).cloned() else {
        return (0, None, 0);
    };
    let mut prev = sample.one_like();
    let mut rank = 0;
    let mut swaps = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        if p != rank {
            m.swap(p, rank);
            swaps += 1;
        }
        let pivot = m[rank][col].clone();
        for i in rank + 1..rows {
            let factor = m[i][col].clone();
            for j in col + 1..cols {
                let num = m[i][j].clone() * pivot.clone() - factor.clone() * m[rank][j].clone();
                m[i][j] = num.divide(&prev).expect("previous pivot is nonzero");
            }
            m[i][col] = pivot.zero_like();
        }
        prev = pivot;
        rank += 1;
    }
    (rank, (rank > 0).then_some(prev), swaps)
}

/// Rank of a rational matrix. Rows are scaled to integers first so the
/// elimination runs on `BigInt` with exact divisions.
pub fn exact_rank(m: &ExactMatrix<Rational>) -> usize {
    let rows: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|i| {
            let row = m.row(i);
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    integer_rank(rows)
}

pub fn integer_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(p, rank);
        let pivot = m[rank][col].clone();
        let (top, rest) = m.split_at_mut(rank + 1);
        let prow = &top[rank];
        for row in rest.iter_mut() {
            let factor = std::mem::take(&mut row[col]);
            for j in col + 1..cols {
                let num = &row[j] * &pivot - &factor * &prow[j];
                row[j] = num / &prev;
            }
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Unique solution of `A·x = b` over a field.
pub fn solve_unique<F: Field>(a: &ExactMatrix<F>, b: &[F]) -> Result<Vec<F>, SolveError> {
    if a.rows != b.len() {
        return Err(SolveError::DimensionMismatch(format!("{} rows vs {} values", a.rows, b.len())));
    }
    let n = a.cols;
    if n == 0 {
        return if b.iter().all(|x| x.is_zero()) { Ok(Vec::new()) } else { Err(SolveError::InconsistentSystem) };
    }
    let mut m: Vec<Vec<F>> = (0..a.rows)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = m[r][col].inverse().expect("nonzero pivot");
        for j in col..=n {
            m[r][j] = m[r][j].clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..=n {
                    m[i][j] = m[i][j].clone() - f.clone() * m[r][j].clone();
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[n].is_zero()) {
        return Err(SolveError::InconsistentSystem);
    }
    if pivots.len() < n {
        return Err(SolveError::UnderdeterminedSystem { rank: pivots.len(), unknowns: n });
    }
    Ok((0..n).map(|i| m[i][n].clone()).collect())
}
