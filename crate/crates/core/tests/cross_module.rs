mod common;

use common::q;
use quizlab::approx::{closure_membership_demo, encode, sequence_from_germ, GermInstance};
use quizlab::exact::Rational;
use quizlab::families::{beta_curve, expand_family, multinomial, CurveKind, FamilyDescriptor, Task, Variant};
use quizlab::identify::{falsify_random, verify_linear_span, IdentificationSequence};
use quizlab::neural::{interpolation_points, PolyActivationNet};
use quizlab::poly::{Monomial, QPoly};
use quizlab::protocol::{run_approx, run_exact, ApproxGameConfig, Strategy, Verdict};
use quizlab::witness::derivative_matrix;
use rand::Rng;

fn id(v: Variant) -> FamilyDescriptor {
    FamilyDescriptor::identity(v).unwrap()
}

#[test]
fn identified_spans_admit_no_counterexample() {
    for d in 1..=4u32 {
        let desc = id(Variant::UnivariateD { d });
        let seq = IdentificationSequence::univariate(&(0..=d as i64).collect::<Vec<_>>());
        assert!(verify_linear_span(&seq, &desc.base_support()));
        assert_eq!(falsify_random(&seq, &desc, &desc, 1000, d as u64).unwrap(), None);
    }
    let easy = id(Variant::EasyPowerSum { l: 1, n: 2 });
    let grid: Vec<Vec<i64>> = vec![vec![0, 0], vec![1, 0], vec![0, 1]];
    let seq = IdentificationSequence::from_points(2, grid);
    assert!(verify_linear_span(&seq, &easy.base_support()));
    assert_eq!(falsify_random(&seq, &easy, &easy, 1000, 5).unwrap(), None);
}

#[test]
fn quizmaster_messages_factor_through_the_family() {
    let mut r = common::rng(11);
    for v in [Variant::EasyPowerSum { l: 2, n: 2 }, Variant::NeuralPower { n: 3 }, Variant::HypercubeShift { n: 3 }] {
        let desc = id(v);
        let s = Strategy::builtin(&desc, 3).unwrap();
        for _ in 0..20 {
            let mut a = common::random_ints(&mut r, desc.param_arity(), -9, 9);
            let mut b = common::random_ints(&mut r, desc.param_arity(), -9, 9);
            a[0] = Rational::zero();
            b[0] = Rational::zero();
            let (ta, tb) = (run_exact(&desc, &s, &a).unwrap(), run_exact(&desc, &s, &b).unwrap());
            assert_eq!(ta.quizmaster_message, tb.quizmaster_message);
        }
    }
}

#[test]
fn constant_germs_reproduce_exact_games() {
    let mut r = common::rng(12);
    let cases = [
        FamilyDescriptor::new(Variant::UnivariateD { d: 3 }, Task::Integral).unwrap(),
        id(Variant::EasyPowerSum { l: 2, n: 2 }),
        FamilyDescriptor::new(Variant::HypercubeShift { n: 2 }, Task::Elimination).unwrap(),
        id(Variant::BorderBinomial { n: 2 }),
    ];
    for desc in cases {
        let s = Strategy::builtin(&desc, 1).unwrap();
        for _ in 0..10 {
            let u = common::random_ints(&mut r, desc.param_arity(), -6, 6);
            let exact = run_exact(&desc, &s, &u).unwrap();
            let h = expand_family(&desc.base(), &u, 200_000).unwrap();
            let approx = run_approx(&desc, &s, &ApproxGameConfig::symbolic(GermInstance::constant(&u, 4)), &h).unwrap();
            assert_eq!(approx.player_message, exact.player_message, "{desc:?} at {u:?}");
            assert_eq!(approx.verdict, exact.verdict);
        }
    }
}

#[test]
fn power_tower_rows_are_multinomial() {
    // (l, n) = (1, 2): θ(t, ρ, ρ²) has t-linear part 1 + ρX1 + ρ²X2
    let desc = id(Variant::EasyPowerSum { l: 1, n: 2 });
    let rhos = [2i64, 3, 5];
    let curves: Vec<_> = rhos.iter().map(|&r| beta_curve(&desc, CurveKind::PowerTower(q(r))).unwrap()).collect();
    let m = derivative_matrix(&desc, &curves, 1000).unwrap();
    for (i, &rho) in rhos.iter().enumerate() {
        let row: Vec<Rational> = desc
            .base_support()
            .iter()
            .map(|a| {
                let e = a.0[0] + 2 * a.0[1];
                Rational::from_integer(multinomial(&a.0)) * q(rho.pow(e))
            })
            .collect();
        assert_eq!(m.row(i), row.as_slice());
    }
}

#[test]
fn network_matches_family_polynomial() {
    let mut r = common::rng(13);
    for n in 2..=6usize {
        let desc = id(Variant::NeuralPower { n });
        for _ in 0..20 {
            let w: Vec<f64> = (0..=n).map(|_| (r.gen_range(-2000..=2000) as f64) / 1000.0).collect();
            let x: Vec<f64> = (0..n).map(|_| (r.gen_range(-2000..=2000) as f64) / 1000.0).collect();
            let exact = |v: &[f64]| -> Vec<Rational> { v.iter().map(|&z| Rational::new((z * 1000.0).round() as i64, 1000)).collect() };
            let p = expand_family(&desc, &exact(&w), 200_000).unwrap();
            let want = p.evaluate(&exact(&x)).unwrap().to_f64();
            let got = PolyActivationNet::new(w).unwrap().forward(&x).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn neural_interpolation_points_identify() {
    let desc = id(Variant::NeuralPower { n: 3 });
    let support = desc.base_support();
    let hits = (0..100).filter(|&s| verify_linear_span(&interpolation_points(3, s), &support)).count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn first_order_encoding_matches_sampled_family() {
    let eps = Rational::new(1, 16);
    for n in 2..=4u32 {
        let desc = id(Variant::BorderBinomial { n });
        let germ = GermInstance::border(n);
        let e = encode(&germ, &desc, germ.precision).unwrap();
        assert!(e.holomorphic);
        let point = &sequence_from_germ(&germ, std::slice::from_ref(&eps)).unwrap()[0];
        let sampled = expand_family(&desc, point, 200_000).unwrap();
        let first_order = e.h.clone() + e.h_prime_leading.scale(&eps);
        // the remainder is O(ε²)
        let gap = sampled.max_coeff_distance(&first_order);
        assert!(gap <= &eps * &eps, "n={n}: gap {gap}");
        if n == 2 {
            assert_eq!(sampled, first_order);
        }
    }
}

#[test]
fn symbolic_game_accepts_encoded_targets() {
    let mut r = common::rng(14);
    let desc = id(Variant::HypercubeShift { n: 2 });
    let s = Strategy::builtin(&desc, 2).unwrap();
    for _ in 0..20 {
        let comps: Vec<Vec<(i64, Rational)>> =
            (0..desc.param_arity()).map(|_| (0..3).map(|e| (e, q(r.gen_range(-4..=4)))).collect()).collect();
        let germ = GermInstance::from_terms(&comps, 8);
        let e = encode(&germ, &desc, 8).unwrap();
        let t = run_approx(&desc, &s, &ApproxGameConfig::symbolic(germ), &e.h).unwrap();
        assert_eq!(t.verdict, Verdict::Accept);
    }
}

#[test]
fn closure_distances_are_dominated() {
    for n in 2..=3u32 {
        let desc = id(Variant::BorderBinomial { n });
        let target = QPoly::from_terms(2, &Rational::zero(), [(Monomial(vec![n - 1, 1]), Rational::one())]);
        let report = closure_membership_demo(&desc, &target, &GermInstance::border(n)).unwrap();
        assert!(report.nonincreasing);
        for row in &report.rows {
            assert!(row.distance <= &report.fitted_c * &Rational::new(1, 1i64 << row.k));
        }
        assert!(report.certificate.unwrap().verified);
    }
    let wrong = QPoly::from_terms(2, &Rational::zero(), [(Monomial(vec![1, 1]), q(2))]);
    assert!(closure_membership_demo(&id(Variant::BorderBinomial { n: 2 }), &wrong, &GermInstance::border(2)).is_err());
}
