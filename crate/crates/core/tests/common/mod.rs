//! Independent oracles shared by the integration suites. Nothing here calls
//! the routines it is used to check.

#![allow(dead_code)]

use quizlab::exact::Rational;
use quizlab::poly::QPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64) -> Rational {
    Rational::from(n)
}

pub fn qs(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| q(x)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_ints(rng: &mut ChaCha8Rng, len: usize, lo: i64, hi: i64) -> Vec<Rational> {
    (0..len).map(|_| q(rng.gen_range(lo..=hi))).collect()
}

pub fn random_nonzero(rng: &mut ChaCha8Rng, len: usize, bound: i64) -> Vec<Rational> {
    (0..len)
        .map(|_| {
            let v = rng.gen_range(1..=bound);
            q(if rng.gen_bool(0.5) { v } else { -v })
        })
        .collect()
}

/// Rank by textbook Gaussian elimination with rational pivots.
pub fn naive_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &pivot;
                for j in c..cols {
                    let v = &m[r][j] - &(&f * &m[rank][j]);
                    m[r][j] = v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `det(Y·Id − A)` by Laplace expansion along the first row.
pub fn cofactor_char_poly(a: &[Vec<Rational>]) -> QPoly {
    let n = a.len();
    let y = QPoly::var_q(1, 0);
    let entries: Vec<Vec<QPoly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = QPoly::constant_q(1, -a[i][j].clone());
                    if i == j {
                        c + y.clone()
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();
    laplace(&entries)
}

fn laplace(m: &[Vec<QPoly>]) -> QPoly {
    let n = m.len();
    if n == 0 {
        return QPoly::constant_q(1, Rational::one());
    }
    let mut acc = QPoly::zero_q(1);
    for j in 0..n {
        let minor: Vec<Vec<QPoly>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, v)| v.clone()).collect()).collect();
        let term = m[0][j].clone() * laplace(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Dense matrix product over the rationals.
pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..n).map(|i| (0..p).map(|j| (0..m).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}
