//! Approximative parameter instances: meromorphic germs `u(ε)` plugged into a
//! family, the encoding `θ(u(ε)) = H + ε·H′`, and the sequences `u(ε_k)`.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitError, DEFAULT_EXPANSION_CAP};
use crate::exact::{Coefficient, ExactError, Rational, TruncatedLaurent, DEFAULT_PRECISION};
use crate::families::{build_circuit, expand_family, FamilyDescriptor, FamilyError, Variant};
use crate::poly::{Monomial, QPoly};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApproxError {
    #[error("germ has {got} components, family expects {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("coefficient of {monomial} is unknown below O(eps^{order}); raise the precision (currently {precision}) and retry")]
    PrecisionUnderflow { monomial: String, order: i64, precision: usize },
    #[error("eps = 0 is excluded from the sequence")]
    ExcludedOrigin,
    #[error("encoding failed: {0}")]
    EncodeFailed(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Parameter germ `u(ε) = (u_1(ε), …, u_r(ε))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermInstance {
    pub components: Vec<TruncatedLaurent>,
    pub precision: usize,
}

impl GermInstance {
    pub fn new(components: Vec<TruncatedLaurent>, precision: usize) -> Self {
        let components = components.iter().map(|c| c.with_precision(precision)).collect();
        GermInstance { components, precision }
    }

    /// Each component given as `(exponent, coefficient)` terms.
    pub fn from_terms(components: &[Vec<(i64, Rational)>], precision: usize) -> Self {
        GermInstance {
            components: components.iter().map(|t| TruncatedLaurent::from_terms(t, precision)).collect(),
            precision,
        }
    }

    pub fn constant(point: &[Rational], precision: usize) -> Self {
        GermInstance {
            components: point.iter().map(|c| TruncatedLaurent::constant(c.clone(), precision)).collect(),
            precision,
        }
    }

    /// `(1/(n·ε), 1, ε)` for the border family of exponent `n`.
    pub fn border(n: u32) -> Self {
        Self::from_terms(
            &[vec![(-1, Rational::new(1, n as i64))], vec![(0, Rational::one())], vec![(1, Rational::one())]],
            DEFAULT_PRECISION,
        )
    }
}

/// Structural check: arity matches and every component carries a known term.
/// All families here have a full affine parameter space, so there is no
/// defining ideal to test.
pub fn validate_instance(germ: &GermInstance, desc: &FamilyDescriptor) -> Result<bool, ApproxError> {
    let expected = desc.param_arity();
    if germ.components.len() != expected {
        return Err(ApproxError::ArityMismatch { expected, got: germ.components.len() });
    }
    Ok(germ.components.iter().all(|c| c.is_exact() || c.significant_terms() > 0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleReport {
    pub monomial: String,
    pub exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodingResult {
    pub h: QPoly,
    pub h_prime_leading: QPoly,
    pub holomorphic: bool,
    pub pole: Option<PoleReport>,
    pub precision_used: usize,
}

pub fn encode(germ: &GermInstance, desc: &FamilyDescriptor, precision: usize) -> Result<EncodingResult, ApproxError> {
    if !validate_instance(germ, desc)? {
        return Err(ApproxError::EncodeFailed("germ failed validation".into()));
    }
    encode_circuit(germ, &build_circuit(&desc.base())?, precision)
}

/// Expands the circuit over truncated Laurent coefficients and splits the
/// result into its `ε⁰` and `ε¹` parts.
pub fn encode_circuit(germ: &GermInstance, circuit: &Circuit, precision: usize) -> Result<EncodingResult, ApproxError> {
    if germ.components.len() != circuit.r {
        return Err(ApproxError::ArityMismatch { expected: circuit.r, got: germ.components.len() });
    }
    let params: Vec<TruncatedLaurent> = germ.components.iter().map(|c| c.with_precision(precision)).collect();
    let ring = TruncatedLaurent::zero(precision);
    let expanded = circuit.expand_with(&ring, &params, DEFAULT_EXPANSION_CAP)?;
    let n = circuit.n;
    let names = crate::poly::default_names(n);
    let mut h = QPoly::zero_q(n);
    let mut h1 = QPoly::zero_q(n);
    for (m, c) in expanded.graded_terms() {
        if let Some(e) = c.lowest_exponent().filter(|&e| e < 0) {
            return Ok(EncodingResult {
                h: QPoly::zero_q(n),
                h_prime_leading: QPoly::zero_q(n),
                holomorphic: false,
                pole: Some(PoleReport { monomial: m.display_with(&names), exponent: e }),
                precision_used: precision,
            });
        }
        let known = |e: i64| {
            c.coefficient(e).ok_or_else(|| ApproxError::PrecisionUnderflow {
                monomial: m.display_with(&names),
                order: c.order().unwrap_or(0),
                precision,
            })
        };
        h.add_term(m.clone(), known(0)?);
        h1.add_term(m.clone(), known(1)?);
    }
    Ok(EncodingResult { h, h_prime_leading: h1, holomorphic: true, pole: None, precision_used: precision })
}

/// `u(ε_k)` for each supplied `ε_k`.
pub fn sequence_from_germ(germ: &GermInstance, eps_values: &[Rational]) -> Result<Vec<Vec<Rational>>, ApproxError> {
    if eps_values.iter().any(Rational::is_zero) {
        return Err(ApproxError::ExcludedOrigin);
    }
    eps_values
        .iter()
        .map(|eps| germ.components.iter().map(|c| c.substitute(eps).map_err(ApproxError::from)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub k: u32,
    pub eps: Rational,
    pub distance: Rational,
}

/// Nullstellensatz certificate `g1·(a − c) + g2·b = 1` showing that the two
/// coefficient equations `a = c`, `b = 0` have no common solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonMembershipCertificate {
    pub equations: Vec<String>,
    pub g1: QPoly,
    pub g2: QPoly,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    pub family: FamilyDescriptor,
    pub h: QPoly,
    pub germ: GermInstance,
    pub rows: Vec<DistanceRow>,
    pub nonincreasing: bool,
    /// Smallest `C` with `distance_k ≤ C·2^(−k)` on the table.
    pub fitted_c: Rational,
    pub certificate: Option<NonMembershipCertificate>,
}

pub const DEMO_STEPS: u32 = 10;

pub fn closure_membership_demo(desc: &FamilyDescriptor, h: &QPoly, germ: &GermInstance) -> Result<ClosureReport, ApproxError> {
    let enc = encode(germ, desc, germ.precision)?;
    if !enc.holomorphic {
        let pole = enc.pole.expect("non-holomorphic encodings name a pole");
        return Err(ApproxError::EncodeFailed(format!("pole eps^{} at {}", pole.exponent, pole.monomial)));
    }
    if enc.h != *h {
        return Err(ApproxError::EncodeFailed(format!("germ encodes {} rather than {h}", enc.h)));
    }
    let eps: Vec<Rational> = (1..=DEMO_STEPS).map(|k| Rational::new(1, 1i64 << k)).collect();
    let points = sequence_from_germ(germ, &eps)?;
    let mut rows = Vec::with_capacity(points.len());
    for (k, (e, u)) in (1..).zip(eps.iter().zip(&points)) {
        let value = expand_family(&desc.base(), u, DEFAULT_EXPANSION_CAP)?;
        rows.push(DistanceRow { k, eps: e.clone(), distance: value.max_coeff_distance(h) });
    }
    let nonincreasing = rows.windows(2).all(|w| w[1].distance <= w[0].distance);
    let fitted_c = rows
        .iter()
        .map(|r| &r.distance * &Rational::from(1i64 << r.k))
        .max()
        .unwrap_or_else(Rational::zero);
    let certificate = match desc.variant {
        Variant::BorderBinomial { n } => border_certificate(n, h),
        _ => None,
    };
    Ok(ClosureReport { family: *desc, h: h.clone(), germ: germ.clone(), rows, nonincreasing, fitted_c, certificate })
}

/// For `H = c·X1^(n−1)·X2`, the image would need `n·t·u^(n−1)·v = c` and
/// `t·v^n = 0`. With `a = n·t·u^(n−1)·v` one has
/// `a^n = n^n·t^(n−1)·u^(n(n−1))·(t·v^n)`, which yields the certificate.
pub fn border_certificate(n: u32, h: &QPoly) -> Option<NonMembershipCertificate> {
    let target = Monomial(vec![n - 1, 1]);
    let terms: Vec<_> = h.terms().collect();
    if terms.len() != 1 || *terms[0].0 != target {
        return None;
    }
    let c = terms[0].1.clone();
    let var = |i| QPoly::var_q(3, i);
    let constant = |x: Rational| QPoly::constant_q(3, x);
    let (t, u, v) = (var(0), var(1), var(2));
    let a = constant(Rational::from(n as i64)) * t.clone() * u.pow(n - 1) * v.clone();
    let b = t.clone() * v.pow(n);
    let c_n = Coefficient::pow(&c, n);
    let inv = c_n.recip().ok()?;
    let mut g1 = QPoly::zero_q(3);
    for i in 0..n {
        g1 = g1 + a.pow(i).scale(&Coefficient::pow(&c, n - 1 - i));
    }
    let g1 = g1.scale(&(-inv.clone()));
    let nn = Coefficient::pow(&Rational::from(n as i64), n);
    let g2 = (t.pow(n - 1) * u.pow(n * (n - 1))).scale(&(nn * inv));
    let lhs = g1.clone() * (a - constant(c.clone())) + g2.clone() * b;
    Some(NonMembershipCertificate {
        equations: vec![format!("{n}*t*u^{}*v = {c}", n - 1), format!("t*v^{n} = 0")],
        g1,
        g2,
        verified: lhs == constant(Rational::one()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn border(n: u32) -> FamilyDescriptor {
        FamilyDescriptor::identity(Variant::BorderBinomial { n }).unwrap()
    }

    fn x1x2() -> QPoly {
        QPoly::from_terms(2, &q(0), [(Monomial(vec![1, 1]), q(1))])
    }

    #[test]
    fn border_encoding() {
        let enc = encode(&GermInstance::border(2), &border(2), 8).unwrap();
        assert!(enc.holomorphic);
        assert_eq!(enc.h, x1x2());
        assert_eq!(enc.h_prime_leading, QPoly::from_terms(2, &q(0), [(Monomial(vec![0, 2]), Rational::new(1, 2))]));
    }

    #[test]
    fn validation() {
        assert!(validate_instance(&GermInstance::border(2), &border(2)).unwrap());
        let easy = FamilyDescriptor::identity(Variant::EasyPowerSum { l: 1, n: 2 }).unwrap();
        assert!(validate_instance(&GermInstance::constant(&[q(1), q(2), q(3)], 4), &easy).unwrap());
        let short = GermInstance::constant(&[q(1), q(2)], 4);
        assert!(matches!(validate_instance(&short, &border(2)), Err(ApproxError::ArityMismatch { .. })));
    }

    #[test]
    fn constant_germ_encodes_value() {
        let easy = FamilyDescriptor::identity(Variant::EasyPowerSum { l: 1, n: 2 }).unwrap();
        let u = [q(2), q(-1), q(3)];
        let enc = encode(&GermInstance::constant(&u, 4), &easy, 4).unwrap();
        assert_eq!(enc.h, expand_family(&easy, &u, 1000).unwrap());
        assert!(enc.h_prime_leading.is_zero());
    }

    #[test]
    fn pole_survives() {
        let mut b = CircuitBuilder::new(1, 2);
        let (t, u, x) = (b.param(0), b.param(1), b.input(0));
        let ux = b.mul(u, x);
        let o = b.mul(t, ux);
        let c = b.finish(o);
        let germ = GermInstance::from_terms(&[vec![(-1, q(1))], vec![(0, q(1))]], 4);
        let enc = encode_circuit(&germ, &c, 4).unwrap();
        assert!(!enc.holomorphic);
        assert_eq!(enc.pole, Some(PoleReport { monomial: "X".into(), exponent: -1 }));
    }

    #[test]
    fn sequences() {
        let s = sequence_from_germ(&GermInstance::border(2), &[Rational::new(1, 2), Rational::new(1, 4)]).unwrap();
        assert_eq!(s, vec![vec![q(1), q(1), Rational::new(1, 2)], vec![q(2), q(1), Rational::new(1, 4)]]);
        assert!(sequence_from_germ(&GermInstance::border(2), &[q(0)]).is_err());
        let c = sequence_from_germ(&GermInstance::constant(&[q(3)], 2), &[q(1), Rational::new(1, 7)]).unwrap();
        assert_eq!(c, vec![vec![q(3)], vec![q(3)]]);
    }

    #[test]
    fn border_demo() {
        let r = closure_membership_demo(&border(2), &x1x2(), &GermInstance::border(2)).unwrap();
        assert!(r.nonincreasing);
        // θ(u(ε)) − H = (ε/2)·X2²
        assert_eq!(r.rows[0].distance, Rational::new(1, 4));
        assert_eq!(r.fitted_c, Rational::new(1, 2));
        assert!(r.rows.windows(2).all(|w| w[1].distance == &w[0].distance / &q(2)));
        assert!(r.certificate.unwrap().verified);
    }

    #[test]
    fn certificates_for_higher_exponents() {
        for n in 2..=5 {
            let h = QPoly::from_terms(2, &q(0), [(Monomial(vec![n - 1, 1]), Rational::new(3, 2))]);
            assert!(border_certificate(n, &h).unwrap().verified, "n = {n}");
        }
        assert!(border_certificate(2, &QPoly::var_q(2, 0)).is_none());
    }

    #[test]
    fn easy_demo_scales_linearly() {
        let easy = FamilyDescriptor::identity(Variant::EasyPowerSum { l: 1, n: 1 }).unwrap();
        let germ = GermInstance::from_terms(&[vec![(1, q(1))], vec![(0, q(3))]], 4);
        let r = closure_membership_demo(&easy, &QPoly::zero_q(1), &germ).unwrap();
        // θ(1, 3) = 1 + 3X
        for row in &r.rows {
            assert_eq!(row.distance, &q(3) * &row.eps);
        }
        assert!(r.certificate.is_none());
    }
}
