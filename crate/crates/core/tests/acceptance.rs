//! One test per acceptance criterion. Each prints a single `PASS`/`FAIL`
//! line on stderr (uncaptured) and then asserts the criterion.

mod common;

use std::io::Write;
use std::time::Instant;

use common::{cofactor_char_poly, q, qs};
use quizlab::approx::{border_certificate, encode, GermInstance};
use quizlab::circuit::{generic_computation, DEFAULT_EXPANSION_CAP};
use quizlab::exact::Rational;
use quizlab::families::{build_circuit, elimination_poly, emit_formula, expand_family, FamilyDescriptor, Task, Variant};
use quizlab::identify::{identification_rate, required_set_size};
use quizlab::kronecker::{build_theta_matrix, char_poly, verify_lemma_identities, SquareMatrix, DEFAULT_THETA_CAP};
use quizlab::neural::{finite_diff_check, train, PolyActivationNet, TrainConfig, TrainStatus};
use quizlab::poly::{graded_support, Monomial, QPoly};
use quizlab::protocol::{fiber_image, run_approx, run_exact, ApproxGameConfig, Strategy, Verdict};
use quizlab::identify::IdentificationSequence;
use quizlab::witness::{lower_bound_report, roots_of_unity_rank, RootsVariant};
use rand::Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{verdict}] criterion {id:>2} {name}: {detail}");
}

fn id(v: Variant) -> FamilyDescriptor {
    FamilyDescriptor::identity(v).unwrap()
}

fn with_task(v: Variant, t: Task) -> FamilyDescriptor {
    FamilyDescriptor::new(v, t).unwrap()
}

#[test]
fn c01_dual_path_family_equivalence() {
    let start = Instant::now();
    let families = [
        Variant::EasyPowerSum { l: 2, n: 2 },
        Variant::UnivariateD { d: 8 },
        Variant::NeuralPower { n: 3 },
        Variant::HypercubeShift { n: 3 },
        Variant::KroneckerDiag { k: 3 },
    ];
    let mut r = common::rng(101);
    let mut mismatches = Vec::new();
    for v in families {
        let desc = id(v);
        let c = build_circuit(&desc).unwrap();
        for _ in 0..100 {
            let u = common::random_ints(&mut r, desc.param_arity(), -9, 9);
            if c.expand(&u, DEFAULT_EXPANSION_CAP).unwrap() != expand_family(&desc, &u, DEFAULT_EXPANSION_CAP).unwrap() {
                mismatches.push(format!("{v} at {u:?}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = mismatches.is_empty() && secs <= 60.0;
    report(1, "dual-path family equivalence", pass, &format!("5 families x 100 points, {} mismatches, {secs:.1}s (limit 60s)", mismatches.len()));
    assert!(pass, "{mismatches:?}");
}

#[test]
fn c02_circuit_size_bounds() {
    let mut failures = Vec::new();
    for l in 1..=8u32 {
        for n in 1..=8usize {
            if n * l as usize > 8 {
                continue;
            }
            let gates = build_circuit(&id(Variant::EasyPowerSum { l, n })).unwrap().size().gates;
            if gates > 2 * n + 3 * l as usize - 1 {
                failures.push(format!("easy-power-sum(l={l},n={n}) has {gates} gates"));
            }
        }
    }
    for n in 1..=5 {
        let gates = build_circuit(&id(Variant::HypercubeShift { n })).unwrap().size().gates;
        if gates > 5 * n {
            failures.push(format!("hypercube-shift(n={n}) has {gates} gates"));
        }
    }
    for l in 1..=4 {
        for n in 1..=4 {
            let c = generic_computation(l, n);
            if c.r != (l + n + 1).pow(2) || c.size().essential_muls != l {
                failures.push(format!("generic({l},{n}): arity {}, {} essential muls", c.r, c.size().essential_muls));
            }
        }
    }
    let pass = failures.is_empty();
    report(2, "circuit size bounds", pass, &format!("easy n*l<=8, hypercube n<=5, generic 4x4 grid; {} violations", failures.len()));
    assert!(pass, "{failures:?}");
}

#[test]
fn c03_lower_bound_witnesses() {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    let trials = [
        Variant::EasyPowerSum { l: 2, n: 2 },
        Variant::EasyPowerSum { l: 2, n: 3 },
        Variant::NeuralPower { n: 2 },
        Variant::NeuralPower { n: 3 },
        Variant::NeuralPower { n: 4 },
        Variant::HypercubeShift { n: 2 },
        Variant::HypercubeShift { n: 3 },
    ];
    for (i, v) in trials.into_iter().enumerate() {
        let r = lower_bound_report(&id(v), 100, 300 + i as u64).unwrap();
        ok &= r.success_count >= 95;
        notes.push(format!("{v} K={} {}/100", r.expected_rank, r.success_count));
    }
    for variant in [RootsVariant::Base, RootsVariant::Derivative, RootsVariant::Integral] {
        let short: Vec<(u32, usize)> = (1..=31)
            .filter_map(|d| {
                let r = roots_of_unity_rank(d, variant).unwrap();
                (r.rank != d as usize + 1).then_some((d, r.rank))
            })
            .collect();
        if short.is_empty() {
            notes.push(format!("roots {variant:?} rank D+1 for D=1..31"));
        } else {
            ok = false;
            let all_d = short.iter().all(|&(d, rank)| rank == d as usize);
            let what = if all_d { "rank D (width D)".to_string() } else { format!("{short:?}") };
            notes.push(format!("roots {variant:?} short of D+1 at {} of 31 D values: {what}", short.len()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = ok && secs <= 120.0;
    report(3, "lower-bound witness ranks", pass, &format!("{}; {secs:.1}s (limit 120s)", notes.join("; ")));
    assert!(pass, "{notes:?}");
}

#[test]
fn c04_exact_game_strategy() {
    let mut r = common::rng(104);
    let mut cases: Vec<FamilyDescriptor> = Vec::new();
    for d in 1..=16 {
        for t in [Task::Identity, Task::Derivative, Task::Integral] {
            cases.push(with_task(Variant::UnivariateD { d }, t));
        }
    }
    cases.push(id(Variant::EasyPowerSum { l: 2, n: 2 }));
    cases.push(with_task(Variant::HypercubeShift { n: 3 }, Task::Elimination));
    cases.push(with_task(Variant::KroneckerDiag { k: 3 }, Task::CharPoly));
    let mut rejects = Vec::new();
    let mut games = 0;
    for desc in &cases {
        let s = Strategy::builtin(desc, 4).unwrap();
        for _ in 0..100 {
            let u = common::random_ints(&mut r, desc.param_arity(), -9, 9);
            games += 1;
            if run_exact(desc, &s, &u).unwrap().verdict != Verdict::Accept {
                rejects.push(format!("{desc:?} at {u:?}"));
            }
        }
    }
    let d2 = id(Variant::UnivariateD { d: 2 });
    let t = run_exact(&d2, &Strategy::with_points(&d2, IdentificationSequence::univariate(&[0, 1, -1])), &[q(2)]).unwrap();
    let transcript_ok = t.quizmaster_message == qs(&[7, 49, 21]) && t.player_message == qs(&[7, 14, 28]) && t.verdict == Verdict::Accept;
    let pass = rejects.is_empty() && transcript_ok;
    report(4, "exact quiz game", pass, &format!("{games} games over {} family/task pairs, {} rejects; D=2,t=2 transcript matches: {transcript_ok}", cases.len(), rejects.len()));
    assert!(pass, "{rejects:?}");
}

#[test]
fn c05_approximative_game() {
    let desc = id(Variant::BorderBinomial { n: 2 });
    let germ = GermInstance::border(2);
    let h = QPoly::from_terms(2, &Rational::zero(), [(Monomial(vec![1, 1]), Rational::one())]);
    let encoded = encode(&germ, &desc, germ.precision).unwrap();
    let encodes = encoded.h == h && encoded.holomorphic;
    let s = Strategy::builtin(&desc, 5).unwrap();
    let symbolic = run_approx(&desc, &s, &ApproxGameConfig::symbolic(germ), &h).unwrap().verdict == Verdict::Accept;

    let mut r = common::rng(105);
    let mut embedding = true;
    for v in [Variant::UnivariateD { d: 3 }, Variant::EasyPowerSum { l: 2, n: 2 }, Variant::HypercubeShift { n: 2 }, Variant::BorderBinomial { n: 2 }] {
        let d = id(v);
        let s = Strategy::builtin(&d, 5).unwrap();
        for _ in 0..20 {
            let u = common::random_ints(&mut r, d.param_arity(), -6, 6);
            let exact = run_exact(&d, &s, &u).unwrap();
            // also play against a wrong target so Reject verdicts are compared too
            let mut target = expand_family(&d, &u, DEFAULT_EXPANSION_CAP).unwrap();
            if r.gen_bool(0.5) {
                let m = d.base_support()[0].clone();
                target = target + QPoly::from_terms(d.input_arity(), &Rational::zero(), [(m, Rational::one())]);
            }
            let reference_accepts = target == expand_family(&d, &u, DEFAULT_EXPANSION_CAP).unwrap();
            let approx = run_approx(&d, &s, &ApproxGameConfig::symbolic(GermInstance::constant(&u, 4)), &target).unwrap();
            embedding &= approx.player_message == exact.player_message;
            embedding &= (approx.verdict == Verdict::Accept) == reference_accepts;
            embedding &= !reference_accepts || approx.verdict == exact.verdict;
        }
    }
    let certificate = border_certificate(2, &h).is_some_and(|c| c.verified);
    let pass = encodes && symbolic && embedding && certificate;
    report(
        5,
        "approximative game and closure",
        pass,
        &format!("encode H=X1*X2: {encodes}; symbolic accept: {symbolic}; constant germs match exact: {embedding}; certificate verified: {certificate}"),
    );
    assert!(pass);
}

#[test]
fn c06_kronecker_identities() {
    let mut r = common::rng(106);
    let mut identity_failures = 0;
    let mut charpoly_mismatch = 0;
    for k in 1..=5usize {
        for i in 0..100 {
            let s = common::random_nonzero(&mut r, 1, 9).remove(0);
            let u = common::random_nonzero(&mut r, k, 9);
            let (a, b, c) = verify_lemma_identities(k, &s, &u).unwrap();
            if !(a && b && c) {
                identity_failures += 1;
            }
            if i < 10 {
                let theta = build_theta_matrix(k, &s, &u, DEFAULT_THETA_CAP).unwrap();
                if char_poly(&theta.matrix) != elimination_poly(k, &s, &u, 10).unwrap() {
                    charpoly_mismatch += 1;
                }
            }
        }
    }
    let mut oracle_mismatch = 0;
    for dim in 1..=5 {
        for _ in 0..20 {
            let rows: Vec<Vec<Rational>> = (0..dim).map(|_| common::random_ints(&mut r, dim, -9, 9)).collect();
            if char_poly(&SquareMatrix::from_rows(rows.clone()).unwrap()) != cofactor_char_poly(&rows) {
                oracle_mismatch += 1;
            }
        }
    }
    let pass = identity_failures == 0 && charpoly_mismatch == 0 && oracle_mismatch == 0;
    report(
        6,
        "Kronecker identities and char poly",
        pass,
        &format!("identity failures {identity_failures}/500; theta vs elimination mismatches {charpoly_mismatch}/50; cofactor oracle mismatches {oracle_mismatch}/100"),
    );
    assert!(pass);
}

#[test]
fn c07_identification_sequences() {
    let size_ok = required_set_size(2, 2, 4).unwrap() == 125u32.into();
    // degree <= 2 univariate span, delta = 2, L = K = 1, m = 4L + 2
    let n_set: u64 = required_set_size(2, 1, 1).unwrap().try_into().unwrap();
    let seeds = 1000u64;
    let rate = identification_rate(1, 6, n_set, &graded_support(1, 2), seeds);
    let bound = 1.0 - 1.0 / n_set as f64;
    let se = (bound * (1.0 - bound) / seeds as f64).sqrt();
    let rate_ok = rate >= bound - 3.0 * se;
    let pass = size_ok && rate_ok;
    report(
        7,
        "identification sequences",
        pass,
        &format!("required_set_size(2,2,4)=125: {size_ok}; rate {rate:.4} vs bound {bound:.4} - 3*SE {se:.4} (N={n_set}, m=6, 1000 seeds)"),
    );
    assert!(pass);
}

#[test]
fn c08_information_hiding() {
    let mut r = common::rng(108);
    let mut identical = true;
    let mut single = true;
    let cases = [
        id(Variant::EasyPowerSum { l: 2, n: 2 }),
        id(Variant::NeuralPower { n: 3 }),
        id(Variant::HypercubeShift { n: 3 }),
        with_task(Variant::HypercubeShift { n: 2 }, Task::Elimination),
        id(Variant::BorderBinomial { n: 2 }),
    ];
    for desc in &cases {
        let s = Strategy::builtin(desc, 8).unwrap();
        for _ in 0..10 {
            let mut a = common::random_ints(&mut r, desc.param_arity(), -9, 9);
            let mut b = common::random_ints(&mut r, desc.param_arity(), -9, 9);
            a[0] = Rational::zero();
            b[0] = Rational::zero();
            let ja = run_exact(desc, &s, &a).unwrap().quizmaster_export().to_json();
            let jb = run_exact(desc, &s, &b).unwrap().quizmaster_export().to_json();
            identical &= ja == jb;
            single &= fiber_image(desc, &s, &a, 25, 9).unwrap().len() == 1;
        }
    }
    for d in [3u32, 4] {
        let desc = id(Variant::UnivariateD { d });
        let s = Strategy::builtin(&desc, 8).unwrap();
        single &= fiber_image(&desc, &s, &[q(1)], 25, 9).unwrap().len() == 1;
    }
    let pass = identical && single;
    report(8, "information hiding", pass, &format!("quizmaster exports byte-identical across t=0 fibers: {identical}; one fiber image per base: {single}"));
    assert!(pass);
}

#[test]
fn c09_neural_gradients() {
    let mut r = common::rng(109);
    let mut worst: f64 = 0.0;
    for n in 2..=6usize {
        for _ in 0..10 {
            let w: Vec<f64> = (0..=n).map(|_| r.gen_range(-1.0..=1.0)).collect();
            let xs: Vec<Vec<f64>> = (0..8).map(|_| (0..n).map(|_| r.gen_range(-1.0..=1.0)).collect()).collect();
            let ys: Vec<f64> = (0..8).map(|_| r.gen_range(-1.0..=1.0)).collect();
            worst = worst.max(finite_diff_check(&PolyActivationNet::new(w).unwrap(), &xs, &ys, 1e-6).unwrap());
        }
    }
    let start = Instant::now();
    let epochs = 10_000;
    let mut complete = 0;
    let mut diverged = 0;
    for seed in 0..10 {
        let rep = train(&TrainConfig::random(6, 32, epochs, 0.01, seed)).unwrap();
        let expected_len = match rep.status {
            TrainStatus::Completed => epochs + 1,
            TrainStatus::Diverged { epoch } => {
                diverged += 1;
                epoch + 1
            }
        };
        if rep.losses.len() == expected_len {
            complete += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-4 && complete == 10 && secs <= 120.0;
    report(
        9,
        "neural gradients and training harness",
        pass,
        &format!("worst finite-difference error {worst:.2e} (< 1e-4) over 50 configs; {complete}/10 complete curves ({diverged} diverged) at n=6, 1e4 epochs in {secs:.1}s (limit 120s)"),
    );
    assert!(pass);
}

#[test]
fn c10_formula_emitter() {
    let reports: Vec<_> = (1..=6).map(|n| emit_formula(n, 10)).collect();
    let ratios: Vec<f64> = reports.iter().map(|r| r.symbols as f64 / (r.n as f64).powi(3)).collect();
    let c = ratios.iter().copied().fold(0.0, f64::max);
    let within = reports.iter().all(|r| r.symbols as f64 <= c * (r.n as f64).powi(3));
    let nonincreasing = ratios.windows(2).all(|w| w[1] <= w[0]);
    let blocks = reports.iter().all(|r| {
        let k = 16 * r.n * r.n + 2;
        r.equations == k && (1..=k).all(|i| r.text.contains(&format!(" V{i} = "))) && !r.text.contains(&format!(" V{} = ", k + 1))
    });
    let pass = within && nonincreasing && blocks;
    report(
        10,
        "formula emitter",
        pass,
        &format!("symbols {:?}, C = {c:.1}, symbols/n^3 nonincreasing: {nonincreasing}; K = 16n^2+2 blocks present: {blocks}", reports.iter().map(|r| r.symbols).collect::<Vec<_>>()),
    );
    assert!(pass);
}
