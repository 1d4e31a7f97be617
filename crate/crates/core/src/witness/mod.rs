//! Rank witnesses behind the lower bounds.
//!
//! Each lower bound reduces to a matrix of first-order directions having full
//! rank. This module assembles those matrices from the family expansions and
//! computes their exact rank.

mod matrix;

use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{
    modular_root_of_unity, prime_for_roots_of_unity, Coefficient, PrimeFieldElement, Rational,
};
use crate::families::{
    beta_curve, binomial_usize, expand_family, BetaCurve, CurveKind, FamilyDescriptor, FamilyError,
    Task, Variant,
};
use crate::kronecker::{build_theta_matrix, char_poly, KroneckerError};
use crate::poly::{Monomial, Polynomial, QPoly};

pub use matrix::{exact_rank, integer_rank, solve_unique, ExactMatrix, SolveError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WitnessError {
    #[error("curve expansion is not linear in t (degree {degree})")]
    NonlinearInT { degree: u32 },
    #[error("{what} = {value} exceeds the desk-scale cap {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("expected {expected} points, got {got}")]
    PointCount { expected: usize, got: usize },
    #[error("no lower-bound recipe for {0}")]
    Unsupported(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Kronecker(#[from] KroneckerError),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
    #[error(transparent)]
    Exact(#[from] crate::exact::ExactError),
}

/// Row `i` holds the `t`-linear part of the family expanded along curve `i`,
/// in the graded order of the base support.
pub fn derivative_matrix(
    desc: &FamilyDescriptor,
    curves: &[BetaCurve],
    cap: usize,
) -> Result<ExactMatrix<Rational>, WitnessError> {
    let support = desc.target_support();
    let t = QPoly::var_q(1, 0);
    let mut rows = Vec::with_capacity(curves.len());
    for curve in curves {
        let point = curve.at(&t)?;
        let expansion = expand_family(desc, &point, cap)?;
        let degree = expansion.terms().filter_map(|(_, c)| c.total_degree()).max().unwrap_or(0);
        if degree > 1 {
            return Err(WitnessError::NonlinearInT { degree });
        }
        rows.push(first_order_row(&expansion, &support));
    }
    Ok(ExactMatrix::from_rows(rows))
}

fn first_order_row<F: Coefficient>(expansion: &Polynomial<Polynomial<F>>, support: &[Monomial]) -> Vec<F> {
    let linear = Monomial(vec![1]);
    support.iter().map(|m| expansion.coefficient(m).coefficient(&linear)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootsVariant {
    Base,
    Derivative,
    Integral,
}

impl RootsVariant {
    fn task(self) -> Task {
        match self {
            RootsVariant::Base => Task::Identity,
            RootsVariant::Derivative => Task::Derivative,
            RootsVariant::Integral => Task::Integral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootsOfUnityReport {
    pub d: u32,
    pub variant: RootsVariant,
    pub prime: u64,
    pub root: u64,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
}

/// Matrix of `d/ds θ(s + ζ)` at `s = 0` for the `D+1` roots of unity,
/// computed in `F_p[s]` by expanding the family along each shifted curve.
pub fn roots_of_unity_matrix(
    d: u32,
    variant: RootsVariant,
) -> Result<(ExactMatrix<PrimeFieldElement>, u64, u64), WitnessError> {
    let order = d as u64 + 1;
    let p = prime_for_roots_of_unity(order);
    let zeta = modular_root_of_unity(p, order)?;
    let desc = FamilyDescriptor::new(Variant::UnivariateD { d }, variant.task())?;
    let support = desc.target_support();
    let zero = PrimeFieldElement::new(0, p);
    let s = Polynomial::var(1, 0, &zero);
    let mut rows = Vec::with_capacity(order as usize);
    let mut root = zero.one_like();
    for _ in 0..order {
        let shifted = s.clone() + Polynomial::constant(1, root);
        let expansion = expand_family(&desc, &[shifted], usize::MAX)?;
        rows.push(first_order_row(&expansion, &support));
        root = root * zeta;
    }
    Ok((ExactMatrix::from_rows(rows), p, zeta.residue()))
}

pub fn roots_of_unity_rank(d: u32, variant: RootsVariant) -> Result<RootsOfUnityReport, WitnessError> {
    if d > 64 {
        return Err(WitnessError::CapExceeded { what: "D", value: d as usize, cap: 64 });
    }
    let (m, prime, root) = roots_of_unity_matrix(d, variant)?;
    Ok(RootsOfUnityReport { d, variant, prime, root, rows: m.rows(), cols: m.cols(), rank: m.rank() })
}

/// `L_1, …, L_{2^n} ∈ Q[U]`: the `T`-linear parts of the coefficients of
/// `Π_j (Y − (j + T·Π U_i^[j]_i))`, ordered by descending power of `Y`.
pub fn hypercube_lk_polynomials(n: usize) -> Result<Vec<QPoly>, WitnessError> {
    if n > 5 {
        return Err(WitnessError::CapExceeded { what: "n", value: n, cap: 5 });
    }
    let size = 1usize << n;
    let q = Rational::zero();
    let roots: Vec<Rational> = (0..size).map(|j| Rational::from(j as i64)).collect();
    let mut l = vec![QPoly::zero_q(n); size];
    for j in 0..size {
        let others: Vec<Rational> = roots.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, r)| r.clone()).collect();
        let cofactor = crate::families::product_of_linear_factors(&q, &others);
        let mono = Monomial((0..n).map(|i| ((j >> i) & 1) as u32).collect());
        for (k, lk) in l.iter_mut().enumerate() {
            // L_{k+1} sits at Y^(2^n − k − 1)
            let c = cofactor.coefficient(&Monomial(vec![(size - k - 1) as u32]));
            lk.add_term(mono.clone(), -c);
        }
    }
    Ok(l)
}

/// `(L_k(u_l))` with one row per point and one column per `k`.
pub fn hypercube_lk_matrix(n: usize, points: &[Vec<Rational>]) -> Result<ExactMatrix<Rational>, WitnessError> {
    let size = 1usize << n;
    if points.len() != size {
        return Err(WitnessError::PointCount { expected: size, got: points.len() });
    }
    let l = hypercube_lk_polynomials(n)?;
    let rows = points
        .iter()
        .map(|u| l.iter().map(|lk| lk.evaluate(u).map_err(WitnessError::from)).collect())
        .collect::<Result<Vec<Vec<Rational>>, _>>()?;
    Ok(ExactMatrix::from_rows(rows))
}

/// Same matrix as [`hypercube_lk_matrix`], obtained from characteristic
/// polynomials of the Kronecker-built matrices: the `s`-linear part of each
/// coefficient is recovered by exact interpolation over `s = 0..=2^k`.
pub fn kronecker_lk_matrix(k: usize, points: &[Vec<Rational>]) -> Result<ExactMatrix<Rational>, WitnessError> {
    let size = 1usize << k;
    if points.len() != size {
        return Err(WitnessError::PointCount { expected: size, got: points.len() });
    }
    let nodes: Vec<Rational> = (0..=size).map(|s| Rational::from(s as i64)).collect();
    let vandermonde = ExactMatrix::from_rows(
        nodes.iter().map(|s| (0..=size).map(|e| s.powi(e as i32).expect("nonnegative power")).collect()).collect(),
    );
    let mut rows = Vec::with_capacity(size);
    for u in points {
        let polys = nodes
            .iter()
            .map(|s| Ok(char_poly(&build_theta_matrix(k, s, u, 8)?.matrix)))
            .collect::<Result<Vec<QPoly>, KroneckerError>>()?;
        let mut row = Vec::with_capacity(size);
        for kk in 0..size {
            let y = Monomial(vec![(size - kk - 1) as u32]);
            let values: Vec<Rational> = polys.iter().map(|p| p.coefficient(&y)).collect();
            let coeffs = solve_unique(&vandermonde, &values).expect("distinct interpolation nodes");
            row.push(coeffs[1].clone());
        }
        rows.push(row);
    }
    Ok(ExactMatrix::from_rows(rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub family: FamilyDescriptor,
    pub expected_rank: usize,
    pub achieved_rank: usize,
    pub trials: usize,
    pub success_count: usize,
    pub seed: u64,
    /// Rank per trial; trial `i` draws from stream `i` of the seeded generator.
    pub ranks: Vec<usize>,
    pub failed_trials: Vec<usize>,
    pub matrix_rows: usize,
    pub matrix_cols: usize,
    pub sample_box: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl WitnessReport {
    pub fn success_rate(&self) -> f64 {
        self.success_count as f64 / self.trials.max(1) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,rank,expected,success\n");
        for (i, r) in self.ranks.iter().enumerate() {
            out.push_str(&format!("{i},{r},{},{}\n", self.expected_rank, *r == self.expected_rank));
        }
        out
    }
}

/// Expected rank of the lower-bound witness for a family.
pub fn expected_rank(desc: &FamilyDescriptor) -> Result<usize, WitnessError> {
    Ok(match desc.variant {
        Variant::EasyPowerSum { l, n } => binomial_usize(((1u64 << l) - 1) + n as u64, n as u64),
        Variant::NeuralPower { n } => binomial_usize(2 * n as u64 - 1, n as u64 - 1),
        Variant::HypercubeShift { n } => 1 << n,
        Variant::KroneckerDiag { k } => 1 << k,
        Variant::UnivariateD { d } => d as usize + 1,
        Variant::BorderBinomial { .. } => return Err(WitnessError::Unsupported(desc.variant.to_string())),
    })
}

fn check_caps(desc: &FamilyDescriptor) -> Result<(), WitnessError> {
    let over = |what, value: usize, cap: usize| {
        if value > cap {
            Err(WitnessError::CapExceeded { what, value, cap })
        } else {
            Ok(())
        }
    };
    match desc.variant {
        Variant::EasyPowerSum { l, n } => over("n*l", n * l as usize, 8),
        Variant::NeuralPower { n } => over("n", n, 6),
        Variant::HypercubeShift { n } => over("n", n, 5),
        Variant::KroneckerDiag { k } => over("k", k, 4),
        Variant::UnivariateD { d } => over("D", d as usize, 64),
        Variant::BorderBinomial { .. } => Err(WitnessError::Unsupported(desc.variant.to_string())),
    }
}

/// Sampling box for a trial. Power towers only need distinct nodes, so the
/// small box `[1, 4K]` suffices. Other families need a box wide enough that a
/// random point avoids the degree-`K·deg` determinant hypersurface with
/// probability at least 99%.
pub fn sample_box(desc: &FamilyDescriptor, k: usize) -> u64 {
    let small = 4 * k as u64;
    match desc.variant {
        Variant::EasyPowerSum { .. } | Variant::UnivariateD { .. } => small,
        Variant::NeuralPower { n } => small.max(100 * (k * n) as u64),
        Variant::HypercubeShift { n } | Variant::KroneckerDiag { k: n } => small.max(100 * (k * n) as u64),
        Variant::BorderBinomial { .. } => small,
    }
}

fn random_points(rng: &mut ChaCha8Rng, count: usize, dim: usize, bound: u64) -> Vec<Vec<Rational>> {
    (0..count)
        .map(|_| (0..dim).map(|_| Rational::from(rng.gen_range(1..=bound) as i64)).collect())
        .collect()
}

fn trial_rank(desc: &FamilyDescriptor, k: usize, bound: u64, rng: &mut ChaCha8Rng) -> Result<(usize, usize, usize), WitnessError> {
    let base = desc.base();
    let m = match desc.variant {
        Variant::EasyPowerSum { .. } => {
            let rhos = sample(rng, bound as usize, k);
            let curves = rhos
                .iter()
                .map(|r| beta_curve(&base, CurveKind::PowerTower(Rational::from(r as i64 + 1))))
                .collect::<Result<Vec<_>, _>>()?;
            derivative_matrix(&base, &curves, usize::MAX)?
        }
        Variant::NeuralPower { n } => {
            let curves = random_points(rng, k, n, bound)
                .into_iter()
                .map(|rho| beta_curve(&base, CurveKind::FixedDirection(rho)))
                .collect::<Result<Vec<_>, _>>()?;
            derivative_matrix(&base, &curves, usize::MAX)?
        }
        Variant::HypercubeShift { n } => hypercube_lk_matrix(n, &random_points(rng, k, n, bound))?,
        Variant::KroneckerDiag { k: kk } => kronecker_lk_matrix(kk, &random_points(rng, k, kk, bound))?,
        Variant::UnivariateD { d } => {
            let r = roots_of_unity_rank(d, RootsVariant::Base)?;
            return Ok((r.rank, r.rows, r.cols));
        }
        Variant::BorderBinomial { .. } => return Err(WitnessError::Unsupported(desc.variant.to_string())),
    };
    Ok((exact_rank(&m), m.rows(), m.cols()))
}

/// Run `trials` independent seeded witness constructions and compare each
/// achieved rank with the expected one.
pub fn lower_bound_report(desc: &FamilyDescriptor, trials: usize, seed: u64) -> Result<WitnessReport, WitnessError> {
    check_caps(desc)?;
    let k = expected_rank(desc)?;
    let bound = sample_box(desc, k);
    let start = Instant::now();
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            trial_rank(desc, k, bound, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ranks: Vec<usize> = results.iter().map(|r| r.0).collect();
    let failed_trials: Vec<usize> = ranks.iter().enumerate().filter(|(_, &r)| r != k).map(|(i, _)| i).collect();
    let (matrix_rows, matrix_cols) = results.first().map_or((0, 0), |r| (r.1, r.2));
    Ok(WitnessReport {
        family: *desc,
        expected_rank: k,
        achieved_rank: ranks.iter().copied().max().unwrap_or(0),
        trials,
        success_count: trials - failed_trials.len(),
        seed,
        ranks,
        failed_trials,
        matrix_rows,
        matrix_cols,
        sample_box: bound,
        elapsed_ms: Some(start.elapsed().as_millis() as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn rows_i64(m: &ExactMatrix<Rational>) -> Vec<Vec<Rational>> {
        m.to_rows()
    }

    #[test]
    fn easy_power_sum_rows() {
        let d = FamilyDescriptor::identity(Variant::EasyPowerSum { l: 1, n: 1 }).unwrap();
        let curves: Vec<_> = [1, 2].iter().map(|&r| beta_curve(&d, CurveKind::PowerTower(q(r))).unwrap()).collect();
        let m = derivative_matrix(&d, &curves, 100).unwrap();
        assert_eq!(rows_i64(&m), vec![vec![q(1), q(1)], vec![q(1), q(2)]]);
        assert_eq!(exact_rank(&m), 2);
    }

    #[test]
    fn neural_rows() {
        let d = FamilyDescriptor::identity(Variant::NeuralPower { n: 2 }).unwrap();
        let curves: Vec<_> = [[1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|r| beta_curve(&d, CurveKind::FixedDirection(vec![q(r[0]), q(r[1])])).unwrap())
            .collect();
        let m = derivative_matrix(&d, &curves, 100).unwrap();
        assert_eq!(
            rows_i64(&m),
            vec![vec![q(1), q(0), q(0)], vec![q(0), q(0), q(1)], vec![q(1), q(2), q(1)]]
        );
        assert_eq!(exact_rank(&m), 3);
        let single = derivative_matrix(&d, &curves[2..], 100).unwrap();
        assert_eq!(exact_rank(&single), 1);
    }

    #[test]
    fn nonlinear_curve_rejected() {
        let d = FamilyDescriptor::identity(Variant::UnivariateD { d: 2 }).unwrap();
        let c = beta_curve(&d, CurveKind::RootShift(0)).unwrap();
        assert!(matches!(derivative_matrix(&d, &[c], 100), Err(WitnessError::NonlinearInT { .. })));
    }

    #[test]
    fn roots_examples() {
        let r = roots_of_unity_rank(3, RootsVariant::Base).unwrap();
        assert_eq!((r.prime, r.root, r.rank), (5, 2, 4));
        let (m, p, _) = roots_of_unity_matrix(1, RootsVariant::Base).unwrap();
        assert_eq!(p, 3);
        let rows: Vec<Vec<u64>> = m.to_rows().iter().map(|r| r.iter().map(|x| x.residue()).collect()).collect();
        // 2·ζ·(1, ζ) for ζ = 1, −1 reduced mod 3: (2,2), (−2,2) = (1,2)
        assert_eq!(rows, vec![vec![2, 2], vec![1, 2]]);
        assert_eq!(roots_of_unity_rank(3, RootsVariant::Integral).unwrap().rank, 4);
    }

    #[test]
    fn lk_n1() {
        let l = hypercube_lk_polynomials(1).unwrap();
        // F = Y² − (1 + T + T·U)·Y + T + T²·U
        assert_eq!(l[0], QPoly::constant_q(1, q(-1)) - QPoly::var_q(1, 0));
        assert_eq!(l[1], QPoly::constant_q(1, q(1)));
        let m = hypercube_lk_matrix(1, &[vec![q(1)], vec![q(2)]]).unwrap();
        assert_eq!(rows_i64(&m), vec![vec![q(-2), q(1)], vec![q(-3), q(1)]]);
        assert_eq!(exact_rank(&m), 2);
        let dup = hypercube_lk_matrix(1, &[vec![q(3)], vec![q(3)]]).unwrap();
        assert_eq!(exact_rank(&dup), 1);
    }

    #[test]
    fn kronecker_route_matches_hypercube() {
        let pts = vec![vec![q(2), q(3)], vec![q(5), q(-1)], vec![q(1), q(7)], vec![q(4), q(4)]];
        assert_eq!(kronecker_lk_matrix(2, &pts).unwrap(), hypercube_lk_matrix(2, &pts).unwrap());
    }

    #[test]
    fn report_is_deterministic() {
        let d = FamilyDescriptor::identity(Variant::NeuralPower { n: 2 }).unwrap();
        let a = lower_bound_report(&d, 8, 11).unwrap();
        let b = lower_bound_report(&d, 8, 11).unwrap();
        assert_eq!(a.ranks, b.ranks);
        assert_eq!(a.expected_rank, 3);
        assert_eq!(a.success_count, 8);
    }

    #[test]
    fn expected_ranks() {
        let k = |v| expected_rank(&FamilyDescriptor::identity(v).unwrap()).unwrap();
        assert_eq!(k(Variant::EasyPowerSum { l: 2, n: 2 }), 10);
        assert_eq!(k(Variant::NeuralPower { n: 3 }), 10);
        assert_eq!(k(Variant::UnivariateD { d: 7 }), 8);
        assert_eq!(k(Variant::HypercubeShift { n: 3 }), 8);
    }
}
