//! The concrete parameterized polynomial families, their circuits and
//! closed-form expansions.
//!
//! Every family has two independent constructions: [`build_circuit`] gives a
//! small circuit, while [`expand_family`] evaluates a closed-form coefficient
//! formula that never touches the circuit. Tests compare them.

mod formula;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitBuilder, NodeId};
use crate::exact::{Coefficient, ExactError, Rational};
use crate::poly::{canonical_support, graded_support, monomials_of_degree, Monomial, Polynomial, QPoly};

pub use formula::{emit_formula, formula_points, FormulaReport, MAX_FORMULA_N};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("task {task:?} is not defined for {variant}")]
    UnsupportedTask { variant: String, task: Task },
    #[error("parameter arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("{what}: {value} exceeds cap {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("curve kind {kind} is incompatible with {variant}")]
    IncompatibleCurve { kind: String, variant: String },
    #[error("root of unity index {index} of order {order} is not rational; use the modular witness")]
    IrrationalRoot { index: u64, order: u64 },
    #[error("invalid discrete parameter: {0}")]
    InvalidParameter(String),
    #[error("internal cross-check failed: {0}")]
    CrossCheck(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Variant {
    EasyPowerSum { l: u32, n: usize },
    UnivariateD { d: u32 },
    NeuralPower { n: usize },
    HypercubeShift { n: usize },
    KroneckerDiag { k: usize },
    /// `t·((u·X1 + v·X2)^n − (u·X1)^n)`, whose closure contains `n·X1^(n−1)·X2`.
    BorderBinomial { n: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Identity,
    Derivative,
    Integral,
    Elimination,
    CharPoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    #[serde(flatten)]
    pub variant: Variant,
    pub task: Task,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::EasyPowerSum { l, n } => write!(f, "easy-power-sum(l={l},n={n})"),
            Variant::UnivariateD { d } => write!(f, "univariate-d(D={d})"),
            Variant::NeuralPower { n } => write!(f, "neural-power(n={n})"),
            Variant::HypercubeShift { n } => write!(f, "hypercube-shift(n={n})"),
            Variant::KroneckerDiag { k } => write!(f, "kronecker-diag(k={k})"),
            Variant::BorderBinomial { n } => write!(f, "border-binomial(n={n})"),
        }
    }
}

impl FamilyDescriptor {
    pub fn new(variant: Variant, task: Task) -> Result<Self, FamilyError> {
        let ok = match task {
            Task::Identity => true,
            Task::Derivative | Task::Integral => matches!(variant, Variant::UnivariateD { .. }),
            Task::Elimination => matches!(variant, Variant::HypercubeShift { .. }),
            Task::CharPoly => matches!(variant, Variant::KroneckerDiag { .. }),
        };
        if !ok {
            return Err(FamilyError::UnsupportedTask { variant: variant.to_string(), task });
        }
        let bad = |m: &str| Err(FamilyError::InvalidParameter(m.to_string()));
        match variant {
            Variant::EasyPowerSum { l, n } if l == 0 || n == 0 => return bad("l, n >= 1"),
            Variant::UnivariateD { d } if d == 0 => return bad("D >= 1"),
            Variant::NeuralPower { n } | Variant::HypercubeShift { n } if n == 0 => return bad("n >= 1"),
            Variant::KroneckerDiag { k } if k == 0 => return bad("k >= 1"),
            Variant::BorderBinomial { n } if n < 2 => return bad("border n >= 2"),
            _ => {}
        }
        Ok(FamilyDescriptor { variant, task })
    }

    pub fn identity(variant: Variant) -> Result<Self, FamilyError> {
        Self::new(variant, Task::Identity)
    }

    pub fn base(&self) -> FamilyDescriptor {
        FamilyDescriptor { variant: self.variant, task: Task::Identity }
    }

    pub fn param_arity(&self) -> usize {
        match self.variant {
            Variant::EasyPowerSum { n, .. } | Variant::NeuralPower { n } | Variant::HypercubeShift { n } => n + 1,
            Variant::UnivariateD { .. } => 1,
            Variant::KroneckerDiag { k } => k + 1,
            Variant::BorderBinomial { .. } => 3,
        }
    }

    /// Variable count of the base family polynomial.
    pub fn input_arity(&self) -> usize {
        match self.variant {
            Variant::EasyPowerSum { n, .. } | Variant::NeuralPower { n } | Variant::HypercubeShift { n } => n,
            Variant::UnivariateD { .. } => 1,
            Variant::KroneckerDiag { k } => k,
            Variant::BorderBinomial { .. } => 2,
        }
    }

    /// Variable count of the task image (`Y` for elimination and char-poly tasks).
    pub fn output_arity(&self) -> usize {
        match self.task {
            Task::Elimination | Task::CharPoly => 1,
            _ => self.input_arity(),
        }
    }

    /// Monomials spanned by the base family, graded order.
    pub fn base_support(&self) -> Vec<Monomial> {
        match self.variant {
            Variant::EasyPowerSum { l, n } => graded_support(n, (1u32 << l) - 1),
            Variant::UnivariateD { d } => graded_support(1, d),
            Variant::NeuralPower { n } => monomials_of_degree(n, n as u32),
            Variant::HypercubeShift { n } => multilinear_support(n),
            Variant::KroneckerDiag { k } => multilinear_support(k),
            Variant::BorderBinomial { n } => monomials_of_degree(2, n),
        }
    }

    /// Monomials spanned by the task image.
    pub fn target_support(&self) -> Vec<Monomial> {
        let univariate = |lo: u32, hi: u32| -> Vec<Monomial> { (lo..=hi).map(|e| Monomial(vec![e])).collect() };
        match (self.task, self.variant) {
            (Task::Identity, _) => self.base_support(),
            (Task::Derivative, Variant::UnivariateD { d }) => univariate(0, d - 1),
            (Task::Integral, Variant::UnivariateD { d }) => univariate(1, d + 1),
            (Task::Elimination, Variant::HypercubeShift { n }) => univariate(0, 1 << n),
            (Task::CharPoly, Variant::KroneckerDiag { k }) => univariate(0, 1 << k),
            _ => unreachable!("validated descriptor"),
        }
    }

    /// Per-variable degree bound of the base family.
    pub fn base_degree_bound(&self) -> u32 {
        match self.variant {
            Variant::EasyPowerSum { l, .. } => (1 << l) - 1,
            Variant::UnivariateD { d } => d,
            Variant::NeuralPower { n } => n as u32,
            Variant::HypercubeShift { .. } | Variant::KroneckerDiag { .. } => 1,
            Variant::BorderBinomial { n } => n,
        }
    }

    /// Number of terms a generic expansion of the task image has.
    pub fn expected_terms(&self) -> usize {
        let pow2 = |e: usize| 1usize.checked_shl(e as u32).unwrap_or(usize::MAX);
        match (self.variant, self.task) {
            (Variant::EasyPowerSum { l, n }, _) => {
                binomial_usize((pow2(l as usize) - 1 + n) as u64, n as u64)
            }
            (Variant::UnivariateD { d }, Task::Derivative) => d as usize,
            (Variant::UnivariateD { d }, _) => d as usize + 1,
            (Variant::NeuralPower { n }, _) => binomial_usize(2 * n as u64 - 1, n as u64 - 1),
            (Variant::HypercubeShift { n }, Task::Elimination) | (Variant::KroneckerDiag { k: n }, Task::CharPoly) => {
                pow2(n).saturating_add(1)
            }
            (Variant::HypercubeShift { n }, _) | (Variant::KroneckerDiag { k: n }, _) => pow2(n),
            (Variant::BorderBinomial { n }, _) => n as usize,
        }
    }
}

/// Square-free monomials in `n` variables, graded order.
pub fn multilinear_support(n: usize) -> Vec<Monomial> {
    let all = (0..1usize << n)
        .map(|mask| Monomial((0..n).map(|i| ((mask >> i) & 1) as u32).collect()))
        .collect();
    canonical_support(all)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn binomial_usize(n: u64, k: u64) -> usize {
    use num_traits::ToPrimitive;
    binomial(n, k).to_usize().unwrap_or(usize::MAX)
}

pub fn multinomial(alpha: &[u32]) -> BigInt {
    let mut acc = BigInt::from(1);
    let mut total = 0u64;
    for &a in alpha {
        total += a as u64;
        acc *= binomial(total, a as u64);
    }
    acc
}

fn lift<R: Coefficient>(ring: &R, value: &Rational) -> Result<R, FamilyError> {
    Ok(ring.from_rational_like(value)?)
}

fn check_arity<T>(desc: &FamilyDescriptor, u: &[T]) -> Result<(), FamilyError> {
    if u.len() != desc.param_arity() {
        return Err(FamilyError::ArityMismatch { expected: desc.param_arity(), got: u.len() });
    }
    Ok(())
}

/// Circuit of the base family. Parameter order: `(t, u1..un)` or `(s, u1..uk)`,
/// `(t)` for the univariate family and `(t, u, v)` for the border family.
pub fn build_circuit(desc: &FamilyDescriptor) -> Result<Circuit, FamilyError> {
    if desc.task != Task::Identity {
        return Err(FamilyError::UnsupportedTask { variant: desc.variant.to_string(), task: desc.task });
    }
    let c = match desc.variant {
        Variant::EasyPowerSum { l, n } => {
            let mut b = CircuitBuilder::new(n, n + 1);
            let y = linear_form(&mut b, n);
            let one = b.constant(Rational::one());
            // Σ_{k<2^l} y^k = Π_{i<l} (1 + y^(2^i))
            let mut power = y;
            let mut factors = Vec::new();
            for i in 0..l {
                if i > 0 {
                    power = b.mul(power, power);
                }
                factors.push(b.add(one, power));
            }
            let s = b.product(&factors);
            let t = b.param(0);
            let o = b.mul(t, s);
            b.finish(o)
        }
        Variant::UnivariateD { d } => univariate_circuit(d),
        Variant::NeuralPower { n } => {
            let mut b = CircuitBuilder::new(n, n + 1);
            let y = linear_form(&mut b, n);
            let p = power_node(&mut b, y, n as u64);
            let t = b.param(0);
            let o = b.mul(t, p);
            b.finish(o)
        }
        Variant::HypercubeShift { n } => hypercube_circuit(n),
        Variant::KroneckerDiag { k } => hypercube_circuit(k),
        Variant::BorderBinomial { n } => {
            let mut b = CircuitBuilder::new(2, 3);
            let (u, v) = (b.param(1), b.param(2));
            let (x1, x2) = (b.input(0), b.input(1));
            let a = b.mul(u, x1);
            let c = b.mul(v, x2);
            let s = b.add(a, c);
            let sn = power_node(&mut b, s, n as u64);
            let an = power_node(&mut b, a, n as u64);
            let diff = b.sub(sn, an);
            let t = b.param(0);
            let o = b.mul(t, diff);
            b.finish(o)
        }
    };
    Ok(c)
}

/// `u1·X1 + ... + un·Xn` with parameters `1..=n`.
fn linear_form(b: &mut CircuitBuilder, n: usize) -> NodeId {
    let terms: Vec<NodeId> = (0..n)
        .map(|i| {
            let u = b.param(i + 1);
            let x = b.input(i);
            b.mul(u, x)
        })
        .collect();
    b.sum(&terms)
}

/// `base^e` by left-to-right square and multiply, `e ≥ 1`.
fn power_node(b: &mut CircuitBuilder, base: NodeId, e: u64) -> NodeId {
    assert!(e >= 1);
    let bits = 64 - e.leading_zeros();
    let mut acc = base;
    for i in (0..bits - 1).rev() {
        acc = b.mul(acc, acc);
        if (e >> i) & 1 == 1 {
            acc = b.mul(acc, base);
        }
    }
    acc
}

/// `(t^(D+1) − 1)·Σ_{k≤D} (tX)^k` via binary expansion of `D+1` for both the
/// geometric sum and the power.
fn univariate_circuit(d: u32) -> Circuit {
    let mut b = CircuitBuilder::new(1, 1);
    let t = b.param(0);
    let x = b.input(0);
    let one = b.constant(Rational::one());
    let z = b.mul(t, x);
    let m = d as u64 + 1;
    let bits = 64 - m.leading_zeros();
    // invariant: s = Σ_{k<j} z^k and zp = z^j for the current prefix j of m
    let mut s = one;
    let mut zp = z;
    for i in (0..bits - 1).rev() {
        let f = b.add(one, zp);
        s = b.mul(s, f);
        zp = b.mul(zp, zp);
        if (m >> i) & 1 == 1 {
            s = b.add(s, zp);
            zp = b.mul(zp, z);
        }
    }
    let tp = power_node(&mut b, t, m);
    let scale = b.sub(tp, one);
    let o = b.mul(scale, s);
    b.finish(o)
}

/// `Σ 2^(i−1)·X_i + t·Π (1 + (u_i − 1)·X_i)`.
fn hypercube_circuit(n: usize) -> Circuit {
    let mut b = CircuitBuilder::new(n, n + 1);
    let one = b.constant(Rational::one());
    let xs: Vec<NodeId> = (0..n).map(|i| b.input(i)).collect();
    let mut linear = Vec::with_capacity(n);
    let mut factors = Vec::with_capacity(n);
    for (i, &x) in xs.iter().enumerate() {
        if i == 0 {
            linear.push(x);
        } else {
            let c = b.constant(Rational::from(1i64 << i));
            linear.push(b.mul(c, x));
        }
        let shifted = b.shifted_param(i + 1, Rational::from(-1));
        let prod = b.mul(shifted, x);
        factors.push(b.add(one, prod));
    }
    let lin = b.sum(&linear);
    let p = b.product(&factors);
    let t = b.param(0);
    let tp = b.mul(t, p);
    let o = b.add(lin, tp);
    b.finish(o)
}

/// Closed-form expansion of the task image at `u`, built without circuits.
pub fn expand_family<R: Coefficient>(
    desc: &FamilyDescriptor,
    u: &[R],
    cap: usize,
) -> Result<Polynomial<R>, FamilyError> {
    check_arity(desc, u)?;
    let terms = desc.expected_terms();
    if terms > cap {
        return Err(FamilyError::CapExceeded { what: "expansion terms", value: terms, cap });
    }
    let ring = u[0].zero_like();
    let one = ring.one_like();
    match (desc.variant, desc.task) {
        (Variant::EasyPowerSum { .. } | Variant::NeuralPower { .. }, Task::Identity) => {
            let nvars = desc.input_arity();
            let t = &u[0];
            let mut p = Polynomial::zero(nvars, &ring);
            for m in desc.base_support() {
                let mut c = lift(&ring, &Rational::from(multinomial(&m.0)))? * t.clone();
                for (i, &e) in m.0.iter().enumerate() {
                    c = c * u[i + 1].pow(e);
                }
                p.add_term(m, c);
            }
            Ok(p)
        }
        (Variant::UnivariateD { d }, task) => {
            let t = &u[0];
            let scale = t.pow(d + 1) - one.clone();
            let mut p = Polynomial::zero(1, &ring);
            for k in 0..=d {
                let tk = t.pow(k);
                match task {
                    Task::Identity => p.add_term(Monomial(vec![k]), scale.clone() * tk),
                    Task::Derivative if k >= 1 => p.add_term(
                        Monomial(vec![k - 1]),
                        scale.clone() * tk * ring.from_i64_like(k as i64),
                    ),
                    Task::Integral => p.add_term(
                        Monomial(vec![k + 1]),
                        (scale.clone() * tk).div_integer(k as u64 + 1)?,
                    ),
                    _ => {}
                }
            }
            Ok(p)
        }
        (Variant::HypercubeShift { n }, Task::Identity) => {
            // Σ 2^(i−1) X_i + t·Σ_S Π_{i∈S} (u_i − 1) X^S
            let mut p = Polynomial::zero(n, &ring);
            for i in 0..n {
                p.add_term(Monomial::var(n, i), ring.from_i64_like(1i64 << i));
            }
            for m in multilinear_support(n) {
                let mut c = u[0].clone();
                for (i, &e) in m.0.iter().enumerate() {
                    if e == 1 {
                        c = c * (u[i + 1].clone() - one.clone());
                    }
                }
                p.add_term(m, c);
            }
            Ok(p)
        }
        (Variant::HypercubeShift { n }, Task::Elimination) | (Variant::KroneckerDiag { k: n }, Task::CharPoly) => {
            let diag = diagonal_values(n, &u[0], &u[1..]);
            Ok(product_of_linear_factors(&ring, &diag))
        }
        (Variant::KroneckerDiag { k }, Task::Identity) => {
            // Möbius inversion of the diagonal over subsets of bit positions.
            let diag = diagonal_values(k, &u[0], &u[1..]);
            let mut p = Polynomial::zero(k, &ring);
            for mask in 0..1usize << k {
                let mut c = ring.zero_like();
                let mut sub = mask;
                loop {
                    let sign = (mask ^ sub).count_ones() % 2 == 1;
                    c = if sign { c - diag[sub].clone() } else { c + diag[sub].clone() };
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mask;
                }
                let m = Monomial((0..k).map(|i| ((mask >> i) & 1) as u32).collect());
                p.add_term(m, c);
            }
            Ok(p)
        }
        (Variant::BorderBinomial { n }, Task::Identity) => {
            let (t, a, b) = (&u[0], &u[1], &u[2]);
            let mut p = Polynomial::zero(2, &ring);
            for e1 in 0..n {
                let c = lift(&ring, &Rational::from(binomial(n as u64, e1 as u64)))?
                    * t.clone()
                    * a.pow(e1)
                    * b.pow(n - e1);
                p.add_term(Monomial(vec![e1, n - e1]), c);
            }
            Ok(p)
        }
        (variant, task) => Err(FamilyError::UnsupportedTask { variant: variant.to_string(), task }),
    }
}

/// `d_j = j + t·Π u_i^[j]_i` for `0 ≤ j < 2^n`, bit `i−1` of `j` selecting `u_i`.
pub fn diagonal_values<R: Coefficient>(n: usize, t: &R, u: &[R]) -> Vec<R> {
    (0..1usize << n)
        .map(|j| {
            let mut m = t.clone();
            for (i, ui) in u.iter().enumerate().take(n) {
                if (j >> i) & 1 == 1 {
                    m = m * ui.clone();
                }
            }
            t.from_i64_like(j as i64) + m
        })
        .collect()
}

/// `Π (Y − r)` over the given roots, as a univariate polynomial.
pub fn product_of_linear_factors<R: Coefficient>(ring: &R, roots: &[R]) -> Polynomial<R> {
    // dense ascending coefficients, multiplied one factor at a time
    let mut c = vec![ring.one_like()];
    for r in roots {
        let mut next = vec![ring.zero_like(); c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i + 1] = next[i + 1].clone() + a.clone();
            next[i] = next[i].clone() - a.clone() * r.clone();
        }
        c = next;
    }
    Polynomial::univariate(ring, &c)
}

pub const DEFAULT_ELIMINATION_CAP: usize = 10;

/// Elimination polynomial of the hypercube projection, computed by the
/// closed-form product and cross-checked against evaluation at the vertices.
pub fn elimination_poly(n: usize, t: &Rational, u: &[Rational], cap: usize) -> Result<QPoly, FamilyError> {
    if n > cap {
        return Err(FamilyError::CapExceeded { what: "elimination n", value: n, cap });
    }
    if u.len() != n {
        return Err(FamilyError::ArityMismatch { expected: n, got: u.len() });
    }
    let by_product = product_of_linear_factors(&Rational::zero(), &diagonal_values(n, t, u));
    let by_vertices = elimination_poly_from_vertices(n, t, u)?;
    if by_product != by_vertices {
        return Err(FamilyError::CrossCheck(format!(
            "elimination product {by_product} differs from vertex evaluation {by_vertices}"
        )));
    }
    Ok(by_product)
}

/// `Π_{ε∈{0,1}^n} (Y − Θ(t,u)(ε))` with `Θ` evaluated through its circuit.
pub fn elimination_poly_from_vertices(n: usize, t: &Rational, u: &[Rational]) -> Result<QPoly, FamilyError> {
    let c = hypercube_circuit(n);
    let mut params = vec![t.clone()];
    params.extend(u.iter().cloned());
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0..1usize << n {
        let eps: Vec<Rational> = (0..n).map(|i| Rational::from(((mask >> i) & 1) as i64)).collect();
        values.push(c.evaluate(&params, &eps).map_err(|e| FamilyError::CrossCheck(e.to_string()))?);
    }
    Ok(product_of_linear_factors(&Rational::zero(), &values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum CurveKind {
    /// `t ↦ (t, ρ, ρ^(2^l), …, ρ^(2^((n−1)l)))`
    PowerTower(Rational),
    /// `t ↦ (t, ρ)`
    FixedDirection(Vec<Rational>),
    /// `s ↦ s + ζ` with `ζ = exp(2πi·index/(D+1))`; only rational roots are supported.
    RootShift(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaCurve {
    pub desc: FamilyDescriptor,
    pub kind: CurveKind,
    offset: Rational,
}

pub fn beta_curve(desc: &FamilyDescriptor, kind: CurveKind) -> Result<BetaCurve, FamilyError> {
    let incompatible = || FamilyError::IncompatibleCurve {
        kind: format!("{kind:?}"),
        variant: desc.variant.to_string(),
    };
    let mut offset = Rational::zero();
    match (&kind, desc.variant) {
        (CurveKind::PowerTower(_), Variant::EasyPowerSum { .. }) => {}
        (
            CurveKind::FixedDirection(rho),
            Variant::NeuralPower { .. } | Variant::HypercubeShift { .. } | Variant::KroneckerDiag { .. },
        ) => {
            if rho.len() + 1 != desc.param_arity() {
                return Err(FamilyError::ArityMismatch { expected: desc.param_arity() - 1, got: rho.len() });
            }
        }
        (CurveKind::RootShift(index), Variant::UnivariateD { d }) => {
            let order = d as u64 + 1;
            let index = index % order;
            offset = if index == 0 {
                Rational::one()
            } else if 2 * index == order {
                Rational::from(-1)
            } else {
                return Err(FamilyError::IrrationalRoot { index, order });
            };
        }
        _ => return Err(incompatible()),
    }
    Ok(BetaCurve { desc: *desc, kind, offset })
}

impl BetaCurve {
    /// The parameter point at curve parameter `t`.
    pub fn at<R: Coefficient>(&self, t: &R) -> Result<Vec<R>, FamilyError> {
        match (&self.kind, self.desc.variant) {
            (CurveKind::PowerTower(rho), Variant::EasyPowerSum { l, n }) => {
                let mut out = vec![t.clone()];
                let mut cur = rho.clone();
                for _ in 0..n {
                    out.push(lift(t, &cur)?);
                    for _ in 0..l {
                        cur = &cur * &cur;
                    }
                }
                Ok(out)
            }
            (CurveKind::FixedDirection(rho), _) => {
                let mut out = vec![t.clone()];
                for r in rho {
                    out.push(lift(t, r)?);
                }
                Ok(out)
            }
            (CurveKind::RootShift(_), _) => Ok(vec![t.clone() + lift(t, &self.offset)?]),
            _ => unreachable!("validated at construction"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::DEFAULT_EXPANSION_CAP as CAP;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn qs(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x)).collect()
    }

    fn desc(v: Variant) -> FamilyDescriptor {
        FamilyDescriptor::identity(v).unwrap()
    }

    #[test]
    fn gate_counts() {
        let s = build_circuit(&desc(Variant::EasyPowerSum { l: 3, n: 2 })).unwrap().size();
        assert!(s.gates <= 12, "{s:?}");
        let s = build_circuit(&desc(Variant::HypercubeShift { n: 3 })).unwrap().size();
        assert!(s.gates <= 15, "{s:?}");
        for n in 1..=8usize {
            let s = build_circuit(&desc(Variant::NeuralPower { n })).unwrap().size();
            let log = (n as f64).log2().ceil() as usize;
            assert!(s.gates <= 2 * n + 2 * log, "n={n} {s:?}");
        }
    }

    #[test]
    fn neural_example() {
        let c = build_circuit(&desc(Variant::NeuralPower { n: 2 })).unwrap();
        assert_eq!(c.evaluate(&qs(&[1, 1, 1]), &qs(&[1, 1])).unwrap(), q(4));
    }

    #[test]
    fn univariate_examples() {
        let d = desc(Variant::UnivariateD { d: 2 });
        let c = build_circuit(&d).unwrap();
        assert_eq!(c.expand(&qs(&[2]), CAP).unwrap(), QPoly::univariate_i64(&[7, 14, 28]));
        let der = FamilyDescriptor::new(Variant::UnivariateD { d: 2 }, Task::Derivative).unwrap();
        assert_eq!(expand_family(&der, &qs(&[2]), CAP).unwrap(), QPoly::univariate_i64(&[14, 56]));
        for dd in 1..=10 {
            let d = desc(Variant::UnivariateD { d: dd });
            assert!(expand_family(&d, &qs(&[1]), CAP).unwrap().is_zero());
        }
    }

    #[test]
    fn easy_power_sum_examples() {
        let d = desc(Variant::EasyPowerSum { l: 1, n: 1 });
        assert_eq!(expand_family(&d, &qs(&[1, 2]), CAP).unwrap(), QPoly::univariate_i64(&[1, 2]));
        let c = build_circuit(&d).unwrap();
        assert_eq!(c.expand(&qs(&[2, 3]), CAP).unwrap(), QPoly::univariate_i64(&[2, 6]));
        let sym = c.expand_symbolic(CAP).unwrap();
        // T + T·U·X in variables (T, U, X)
        let want = QPoly::var_q(3, 0) + QPoly::var_q(3, 0) * QPoly::var_q(3, 1) * QPoly::var_q(3, 2);
        assert_eq!(sym, want);
        let d = desc(Variant::EasyPowerSum { l: 1, n: 2 });
        let c = build_circuit(&d).unwrap();
        assert_eq!(c.evaluate(&qs(&[1, 1, 1]), &qs(&[1, 1])).unwrap(), q(3));
    }

    #[test]
    fn elimination_examples() {
        let p = elimination_poly(2, &q(0), &qs(&[5, 7]), 10).unwrap();
        assert_eq!(p, QPoly::univariate_i64(&[0, -6, 11, -6, 1]));
        let p = elimination_poly(2, &q(1), &qs(&[1, 1]), 10).unwrap();
        assert_eq!(p, QPoly::univariate_i64(&[24, -50, 35, -10, 1]));
        assert!(matches!(elimination_poly(11, &q(1), &vec![q(1); 11], 10), Err(FamilyError::CapExceeded { .. })));
    }

    #[test]
    fn curves() {
        let d = desc(Variant::EasyPowerSum { l: 1, n: 2 });
        let c = beta_curve(&d, CurveKind::PowerTower(q(2))).unwrap();
        assert_eq!(c.at(&q(5)).unwrap(), qs(&[5, 2, 4]));
        let d = desc(Variant::NeuralPower { n: 2 });
        let c = beta_curve(&d, CurveKind::FixedDirection(qs(&[1, 0]))).unwrap();
        assert_eq!(c.at(&q(3)).unwrap(), qs(&[3, 1, 0]));
        let d = desc(Variant::UnivariateD { d: 3 });
        let c = beta_curve(&d, CurveKind::RootShift(0)).unwrap();
        assert_eq!(c.at(&q(2)).unwrap(), qs(&[3]));
        assert_eq!(beta_curve(&d, CurveKind::RootShift(2)).unwrap().at(&q(0)).unwrap(), qs(&[-1]));
        assert!(matches!(beta_curve(&d, CurveKind::RootShift(1)), Err(FamilyError::IrrationalRoot { .. })));
        assert!(matches!(
            beta_curve(&d, CurveKind::PowerTower(q(2))),
            Err(FamilyError::IncompatibleCurve { .. })
        ));
    }

    #[test]
    fn task_compatibility() {
        assert!(FamilyDescriptor::new(Variant::NeuralPower { n: 2 }, Task::Derivative).is_err());
        assert!(FamilyDescriptor::new(Variant::HypercubeShift { n: 2 }, Task::CharPoly).is_err());
        let d = FamilyDescriptor::new(Variant::KroneckerDiag { k: 2 }, Task::CharPoly).unwrap();
        assert!(build_circuit(&d).is_err());
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"variant":"kronecker-diag","k":2,"task":"char-poly"}"#);
        assert_eq!(serde_json::from_str::<FamilyDescriptor>(&json).unwrap(), d);
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&[1, 1]), BigInt::from(2));
        assert_eq!(multinomial(&[2, 1, 1]), BigInt::from(12));
        assert_eq!(binomial(5, 2), BigInt::from(10));
    }

    #[test]
    fn hypercube_degenerates_at_t0() {
        let d = desc(Variant::HypercubeShift { n: 3 });
        let a = expand_family(&d, &qs(&[0, 4, -2, 9]), CAP).unwrap();
        let b = expand_family(&d, &qs(&[0, 1, 1, 1]), CAP).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.term_count(), 3);
    }
}
