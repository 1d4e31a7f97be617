//! Existential formula describing the hypercube elimination polynomial.
//!
//! Grammar (whitespace separated tokens, one symbol per token):
//!
//! ```text
//! formula := ("exists" VAR ".")* "(" conj ")"
//! conj    := eqn ("and" eqn)*
//! eqn     := expr "=" expr
//! expr    := term (("+" | "-") term)*
//! term    := atom ("*" atom)*
//! atom    := VAR | INT | VAR "^" INT | "(" expr ")"
//! ```
//!
//! Integer literals count as a single symbol regardless of their length.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaReport {
    pub n: usize,
    pub seed: u64,
    /// Number of evaluation points `K = 16n² + 2`.
    pub equations: usize,
    pub points: Vec<Vec<u64>>,
    pub symbols: usize,
    pub text: String,
}

pub const MAX_FORMULA_N: usize = 15;

/// `K = 16n² + 2` points with coordinates of bit length at most `4n`.
pub fn formula_points(n: usize, seed: u64) -> Vec<Vec<u64>> {
    assert!((1..=MAX_FORMULA_N).contains(&n), "formula n must lie in 1..={MAX_FORMULA_N}");
    let k = 16 * n * n + 2;
    let bound = 1u64 << (4 * n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| (0..n).map(|_| rng.gen_range(0..bound)).collect()).collect()
}

/// `Θ(T, U, ξ)` with a literal point: `c + T*(1+(U1-1)*ξ1)*...`.
fn theta_at_point(xi: &[u64]) -> String {
    let c: u128 = xi.iter().enumerate().map(|(i, &x)| (x as u128) << i).sum();
    let factors: Vec<String> = xi
        .iter()
        .enumerate()
        .map(|(i, x)| format!("( 1 + ( U{} - 1 ) * {} )", i + 1, x))
        .collect();
    format!("{c} + T * {}", factors.join(" * "))
}

/// `Θ(T, U, X)` symbolically.
fn theta_symbolic(n: usize) -> String {
    let linear: Vec<String> = (0..n)
        .map(|i| if i == 0 { "X1".to_string() } else { format!("{} * X{}", 1u64 << i, i + 1) })
        .collect();
    let factors: Vec<String> = (1..=n).map(|i| format!("( 1 + ( U{i} - 1 ) * X{i} )")).collect();
    format!("{} + T * {}", linear.join(" + "), factors.join(" * "))
}

pub fn emit_formula(n: usize, seed: u64) -> FormulaReport {
    let points = formula_points(n, seed);
    let mut text = String::new();
    for i in 1..=n {
        text.push_str(&format!("exists X{i} . "));
    }
    text.push_str("exists T . ");
    for i in 1..=n {
        text.push_str(&format!("exists U{i} . "));
    }
    let mut eqs: Vec<String> = (1..=n).map(|i| format!("X{i} ^ 2 - X{i} = 0")).collect();
    for (k, xi) in points.iter().enumerate() {
        eqs.push(format!("V{} = {}", k + 1, theta_at_point(xi)));
    }
    eqs.push(format!("Y = {}", theta_symbolic(n)));
    text.push_str("( ");
    text.push_str(&eqs.join(" and "));
    text.push_str(" )");
    let symbols = text.split_whitespace().count();
    FormulaReport { n, seed, equations: points.len(), points, symbols, text }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_structure() {
        let f = emit_formula(1, 0);
        assert_eq!(f.equations, 18);
        assert_eq!(f.text.matches(" V").count(), 18);
        assert_eq!(f.text.matches("exists").count(), 3);
        assert!(f.text.contains("exists X1 . exists T . exists U1 ."));
        assert!(f.points.iter().all(|p| p[0] < 16));
    }

    #[test]
    fn cubic_growth() {
        let c: Vec<f64> = (1..=6)
            .map(|n| emit_formula(n, 3).symbols as f64 / (n * n * n) as f64)
            .collect();
        assert!(c.windows(2).all(|w| w[1] <= w[0]), "{c:?}");
    }

    #[test]
    fn deterministic() {
        assert_eq!(emit_formula(2, 9), emit_formula(2, 9));
        assert_ne!(emit_formula(2, 9).points, emit_formula(2, 10).points);
    }
}
