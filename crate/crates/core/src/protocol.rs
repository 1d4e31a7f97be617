//! The one-round quiz game between an honest quizmaster and a player.
//!
//! The quizmaster holds a hidden parameter point `u`, evaluates `θ(u)` at the
//! player's question points and sends the values. The player interpolates,
//! applies its post map and answers with a coefficient vector `v*`. The
//! quizmaster accepts when `v*` and its own reference encoding describe the
//! same polynomial.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{sequence_from_germ, ApproxError, GermInstance};
use crate::circuit::{Circuit, CircuitError};
use crate::exact::{laurent_limit, Coefficient, ExactError, Rational, TruncatedLaurent};
use crate::families::{
    build_circuit, expand_family, product_of_linear_factors, FamilyDescriptor, FamilyError, Task, Variant,
};
use crate::identify::{sample_sequence, verify_linear_span, IdentificationSequence};
use crate::poly::{Monomial, PolyError, Polynomial, QPoly};
use crate::witness::SolveError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("inconsistent system: the values are not explained by the declared support")]
    InconsistentSystem,
    #[error("question points do not identify the support (rank {rank} < {unknowns})")]
    NonIdentifyingPoints { rank: usize, unknowns: usize },
    #[error("strategy does not fit the game: {0}")]
    Incompatible(String),
    #[error("no accumulation candidate covers half of the sample tail")]
    NoStableCluster,
    #[error("numeric mode needs at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("no fiber sampler for {0}")]
    NoFiberSampler(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
}

impl From<SolveError> for ProtocolError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::InconsistentSystem => ProtocolError::InconsistentSystem,
            SolveError::UnderdeterminedSystem { rank, unknowns } => ProtocolError::NonIdentifyingPoints { rank, unknowns },
            SolveError::DimensionMismatch(m) => ProtocolError::Incompatible(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostMap {
    Identity,
    Differentiate,
    Integrate,
    EliminationRepack,
    CharPolyRepack,
}

impl PostMap {
    pub fn for_task(task: Task) -> PostMap {
        match task {
            Task::Identity => PostMap::Identity,
            Task::Derivative => PostMap::Differentiate,
            Task::Integral => PostMap::Integrate,
            Task::Elimination => PostMap::EliminationRepack,
            Task::CharPoly => PostMap::CharPolyRepack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub question_points: IdentificationSequence,
    /// Support the player interpolates on.
    pub interpolation_support: Vec<Monomial>,
    /// Support of the answer `v*`.
    pub target_support: Vec<Monomial>,
    pub post_map: PostMap,
}

impl Strategy {
    /// Interpolate on the base support at identifying points, then apply the
    /// post map matching the task.
    pub fn builtin(desc: &FamilyDescriptor, seed: u64) -> Result<Strategy, ProtocolError> {
        let base = desc.base_support();
        Ok(Strategy {
            question_points: identifying_points(desc.input_arity(), &base, seed)?,
            interpolation_support: base,
            target_support: desc.target_support(),
            post_map: PostMap::for_task(desc.task),
        })
    }

    pub fn with_points(desc: &FamilyDescriptor, points: IdentificationSequence) -> Strategy {
        Strategy {
            question_points: points,
            interpolation_support: desc.base_support(),
            target_support: desc.target_support(),
            post_map: PostMap::for_task(desc.task),
        }
    }

    fn check(&self, desc: &FamilyDescriptor) -> Result<(), ProtocolError> {
        if self.post_map != PostMap::for_task(desc.task) {
            return Err(ProtocolError::Incompatible(format!("post map {:?} for task {:?}", self.post_map, desc.task)));
        }
        if self.question_points.n != desc.input_arity() {
            return Err(ProtocolError::Incompatible(format!(
                "points have {} coordinates, family has {} variables",
                self.question_points.n,
                desc.input_arity()
            )));
        }
        if self.interpolation_support.len() > self.question_points.len() {
            return Err(ProtocolError::Incompatible(format!(
                "{} points cannot identify {} monomials",
                self.question_points.len(),
                self.interpolation_support.len()
            )));
        }
        Ok(())
    }
}

/// Points identifying the span of `support`: the full grid `{0..Δ}^n` when it
/// is small, otherwise seeded random points checked by rank.
pub fn identifying_points(n: usize, support: &[Monomial], seed: u64) -> Result<IdentificationSequence, ProtocolError> {
    let delta = support.iter().flat_map(|m| m.0.iter().copied()).max().unwrap_or(0) as u64;
    let grid = (delta + 1).checked_pow(n as u32).filter(|&g| g <= 4096);
    if let Some(size) = grid {
        let points = (0..size)
            .map(|mut idx| {
                (0..n)
                    .map(|_| {
                        let c = idx % (delta + 1);
                        idx /= delta + 1;
                        c as i64
                    })
                    .collect()
            })
            .collect();
        return Ok(IdentificationSequence { n, set_size: delta + 1, seed, points });
    }
    let m = support.len() + 2;
    let set_size = 4 * (support.len() as u64) * delta.max(1);
    for stream in 0..64u64 {
        let seq = sample_sequence(n, m, set_size, seed.wrapping_add(stream))?;
        if verify_linear_span(&seq, support) {
            return Ok(seq);
        }
    }
    Err(ProtocolError::NonIdentifyingPoints { rank: 0, unknowns: support.len() })
}

impl From<crate::identify::IdentifyError> for ProtocolError {
    fn from(e: crate::identify::IdentifyError) -> Self {
        ProtocolError::Incompatible(e.to_string())
    }
}

/// Solves `A·x = b` for a rational `A` and right-hand side in any ring that
/// contains the rationals. `negligible` decides when a residual counts as zero.
fn solve_over<R: Coefficient>(
    a: &[Vec<Rational>],
    b: &[R],
    cols: usize,
    negligible: impl Fn(&R) -> bool,
) -> Result<Vec<R>, SolveError> {
    if a.len() != b.len() {
        return Err(SolveError::DimensionMismatch(format!("{} rows vs {} values", a.len(), b.len())));
    }
    let mut m: Vec<Vec<Rational>> = a.to_vec();
    let mut rhs: Vec<R> = b.to_vec();
    let lift = |x: &Rational, like: &R| like.from_rational_like(x).expect("rationals embed");
    let mut r = 0;
    let mut pivots = 0;
    for col in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        rhs.swap(p, r);
        let inv = m[r][col].recip().expect("nonzero pivot");
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        rhs[r] = rhs[r].clone() * lift(&inv, &rhs[r]);
        for i in 0..m.len() {
            if i == r || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for j in col..cols {
                let d = &f * &m[r][j];
                m[i][j] = &m[i][j] - &d;
            }
            rhs[i] = rhs[i].clone() - rhs[r].clone() * lift(&f, &rhs[r]);
        }
        r += 1;
        pivots += 1;
        if r == m.len() {
            break;
        }
    }
    if rhs[r..].iter().any(|x| !negligible(x)) {
        return Err(SolveError::InconsistentSystem);
    }
    if pivots < cols {
        return Err(SolveError::UnderdeterminedSystem { rank: pivots, unknowns: cols });
    }
    Ok(rhs.into_iter().take(cols).collect())
}

fn monomial_values(points: &[Vec<Rational>], support: &[Monomial]) -> Vec<Vec<Rational>> {
    crate::identify::evaluation_matrix(points, support).to_rows()
}

/// Unique coefficients on `support` of the polynomial taking `values` at `points`.
pub fn player_interpolate(
    values: &[Rational],
    points: &IdentificationSequence,
    support: &[Monomial],
) -> Result<Vec<Rational>, ProtocolError> {
    if values.len() != points.len() {
        return Err(ProtocolError::Incompatible(format!("{} values for {} points", values.len(), points.len())));
    }
    let a = monomial_values(&points.rational_points(), support);
    Ok(solve_over(&a, values, support.len(), Rational::is_zero)?)
}

/// Image of a polynomial (given on `support`) under the post map.
pub fn apply_post_map<R: Coefficient>(
    post: PostMap,
    nvars: usize,
    support: &[Monomial],
    coeffs: &[R],
    target: &[Monomial],
) -> Result<Vec<R>, ProtocolError> {
    let ring = coeffs.first().map(Coefficient::zero_like).ok_or_else(|| ProtocolError::Incompatible("empty support".into()))?;
    let p = Polynomial::from_coeff_vector(nvars, &ring, support, coeffs);
    let image = match post {
        PostMap::Identity => p,
        PostMap::Differentiate => p.derivative(0)?,
        PostMap::Integrate => p.integral(0)?,
        PostMap::EliminationRepack | PostMap::CharPolyRepack => {
            let vertices: Vec<R> = (0..1usize << nvars)
                .map(|j| {
                    let eps: Vec<R> = (0..nvars).map(|i| ring.from_i64_like(((j >> i) & 1) as i64)).collect();
                    p.evaluate(&eps)
                })
                .collect::<Result<_, _>>()?;
            product_of_linear_factors(&ring, &vertices)
        }
    };
    Ok(image.coeff_vector(target)?)
}

/// Evaluates both encodings at every point. Sound for equality only when the
/// points identify the union of the supports.
pub fn decide_equal(
    f: (&[Monomial], &[Rational]),
    g: (&[Monomial], &[Rational]),
    points: &IdentificationSequence,
) -> bool {
    let pts = points.rational_points();
    let value = |(s, c): (&[Monomial], &[Rational]), p: &[Rational]| -> Rational {
        s.iter()
            .zip(c)
            .map(|(m, c)| m.0.iter().zip(p).fold(c.clone(), |acc, (&e, x)| acc * Coefficient::pow(x, e)))
            .sum()
    };
    pts.iter().all(|p| value(f, p) == value(g, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameMode {
    Exact,
    Symbolic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub points: Vec<Vec<i64>>,
    pub interpolation_support: Vec<String>,
    pub target_support: Vec<String>,
    pub post_map: PostMap,
}

impl StrategySummary {
    fn of(s: &Strategy) -> Self {
        let names = |support: &[Monomial]| -> Vec<String> {
            let nv = support.first().map_or(1, |m| m.0.len());
            let names = crate::poly::default_names(nv);
            support.iter().map(|m| m.display_with(&names)).collect()
        };
        StrategySummary {
            points: s.question_points.points.clone(),
            interpolation_support: names(&s.interpolation_support),
            target_support: names(&s.target_support),
            post_map: s.post_map,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum HiddenInput {
    Point(Vec<Rational>),
    Germ(GermInstance),
    Sequence(Vec<Vec<Rational>>),
}

/// Series-valued messages of the symbolic approximative game and the
/// candidate clusters of the numeric one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxDetail {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series_message: Vec<TruncatedLaurent>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub player_series: Vec<TruncatedLaurent>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Vec<Rational>>,
    pub cluster_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameTranscript {
    pub family: FamilyDescriptor,
    pub mode: GameMode,
    pub strategy: StrategySummary,
    pub seed: u64,
    pub quizmaster_message: Vec<Rational>,
    pub player_message: Vec<Rational>,
    pub reference: Vec<Rational>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx: Option<ApproxDetail>,
    pub hidden_withheld: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<HiddenInput>,
}

impl GameTranscript {
    /// The transcript as the quizmaster publishes it, with the hidden input removed.
    pub fn quizmaster_export(&self) -> GameTranscript {
        GameTranscript { hidden: None, hidden_withheld: true, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts serialize")
    }
}

fn quizmaster_values<R: Coefficient>(circuit: &Circuit, hidden: &[R], points: &[Vec<Rational>]) -> Result<Vec<R>, ProtocolError> {
    let ring = hidden[0].zero_like();
    points
        .iter()
        .map(|p| {
            let inputs: Vec<R> = p.iter().map(|x| ring.from_rational_like(x)).collect::<Result<_, _>>()?;
            Ok(circuit.evaluate_in(&ring, hidden, &inputs)?)
        })
        .collect()
}

fn check_points(target: &[Monomial], seed: u64) -> Result<IdentificationSequence, ProtocolError> {
    let n = target.first().map_or(1, |m| m.0.len());
    identifying_points(n, target, seed)
}

/// Player side for a rational hidden point: interpolate, then post-map.
fn player_answer(
    desc: &FamilyDescriptor,
    strategy: &Strategy,
    circuit: &Circuit,
    hidden: &[Rational],
) -> Result<(Vec<Rational>, Vec<Rational>), ProtocolError> {
    let sigma = quizmaster_values(circuit, hidden, &strategy.question_points.rational_points())?;
    let coeffs = player_interpolate(&sigma, &strategy.question_points, &strategy.interpolation_support)?;
    let answer = apply_post_map(
        strategy.post_map,
        desc.input_arity(),
        &strategy.interpolation_support,
        &coeffs,
        &strategy.target_support,
    )?;
    Ok((sigma, answer))
}

fn verdict(target: &[Monomial], answer: &[Rational], reference: &[Rational], seed: u64) -> Result<Verdict, ProtocolError> {
    let points = check_points(target, seed)?;
    Ok(if decide_equal((target, answer), (target, reference), &points) { Verdict::Accept } else { Verdict::Reject })
}

pub fn run_exact(desc: &FamilyDescriptor, strategy: &Strategy, hidden: &[Rational]) -> Result<GameTranscript, ProtocolError> {
    strategy.check(desc)?;
    let circuit = build_circuit(&desc.base())?;
    let (sigma, answer) = player_answer(desc, strategy, &circuit, hidden)?;
    let reference = expand_family(desc, hidden, usize::MAX)?.coeff_vector(&strategy.target_support)?;
    let seed = strategy.question_points.seed;
    Ok(GameTranscript {
        family: *desc,
        mode: GameMode::Exact,
        strategy: StrategySummary::of(strategy),
        seed,
        quizmaster_message: sigma,
        verdict: verdict(&strategy.target_support, &answer, &reference, seed)?,
        player_message: answer,
        reference,
        approx: None,
        hidden_withheld: false,
        hidden: Some(HiddenInput::Point(hidden.to_vec())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxMode {
    Symbolic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxSource {
    Germ(GermInstance),
    Sequence(Vec<Vec<Rational>>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxGameConfig {
    pub source: ApproxSource,
    /// `ε` values at which a germ is sampled in numeric mode.
    pub schedule: Vec<Rational>,
    pub mode: ApproxMode,
    /// Numeric mode only; `None` clusters by exact equality.
    pub cluster_tolerance: Option<Rational>,
}

pub const MIN_NUMERIC_SAMPLES: usize = 8;

impl ApproxGameConfig {
    pub fn symbolic(germ: GermInstance) -> Self {
        ApproxGameConfig { source: ApproxSource::Germ(germ), schedule: Vec::new(), mode: ApproxMode::Symbolic, cluster_tolerance: None }
    }

    /// `ε_k = 2^(−k)` for `k = 1..=steps`, at most 62 steps.
    pub fn numeric(germ: GermInstance, steps: u32, tolerance: Option<Rational>) -> Self {
        let schedule = (1..=steps.min(62)).map(|k| Rational::new(1, 1i64 << k)).collect();
        ApproxGameConfig { source: ApproxSource::Germ(germ), schedule, mode: ApproxMode::Numeric, cluster_tolerance: tolerance }
    }
}

/// Target `H`, mapped to the task image on the strategy's target support.
fn target_image(desc: &FamilyDescriptor, strategy: &Strategy, h: &QPoly) -> Result<Vec<Rational>, ProtocolError> {
    let coeffs = h.coeff_vector(&strategy.interpolation_support)?;
    if coeffs.is_empty() {
        return Ok(Vec::new());
    }
    apply_post_map(strategy.post_map, desc.input_arity(), &strategy.interpolation_support, &coeffs, &strategy.target_support)
}

pub fn run_approx(
    desc: &FamilyDescriptor,
    strategy: &Strategy,
    config: &ApproxGameConfig,
    h: &QPoly,
) -> Result<GameTranscript, ProtocolError> {
    strategy.check(desc)?;
    let circuit = build_circuit(&desc.base())?;
    let reference = target_image(desc, strategy, h)?;
    let seed = strategy.question_points.seed;
    let target = &strategy.target_support;
    let summary = StrategySummary::of(strategy);
    match config.mode {
        ApproxMode::Symbolic => {
            let ApproxSource::Germ(germ) = &config.source else {
                return Err(ProtocolError::Incompatible("symbolic mode needs a germ".into()));
            };
            let series = quizmaster_values(&circuit, &germ.components, &strategy.question_points.rational_points())?;
            let a = monomial_values(&strategy.question_points.rational_points(), &strategy.interpolation_support);
            let coeffs = solve_over(&a, &series, strategy.interpolation_support.len(), |x: &TruncatedLaurent| {
                x.terms().is_empty()
            })?;
            let player_series =
                apply_post_map(strategy.post_map, desc.input_arity(), &strategy.interpolation_support, &coeffs, target)?;
            let answer = player_series.iter().map(laurent_limit).collect::<Result<Vec<_>, _>>()?;
            Ok(GameTranscript {
                family: *desc,
                mode: GameMode::Symbolic,
                strategy: summary,
                seed,
                quizmaster_message: Vec::new(),
                verdict: verdict(target, &answer, &reference, seed)?,
                player_message: answer,
                reference,
                approx: Some(ApproxDetail { series_message: series, player_series, samples: Vec::new(), cluster_size: None }),
                hidden_withheld: false,
                hidden: Some(HiddenInput::Germ(germ.clone())),
            })
        }
        ApproxMode::Numeric => {
            let (sequence, hidden) = match &config.source {
                ApproxSource::Germ(g) => (sequence_from_germ(g, &config.schedule)?, HiddenInput::Germ(g.clone())),
                ApproxSource::Sequence(s) => (s.clone(), HiddenInput::Sequence(s.clone())),
            };
            if sequence.len() < MIN_NUMERIC_SAMPLES {
                return Err(ProtocolError::TooFewSamples { need: MIN_NUMERIC_SAMPLES, got: sequence.len() });
            }
            let samples = sequence
                .iter()
                .map(|u| player_answer(desc, strategy, &circuit, u).map(|(_, a)| a))
                .collect::<Result<Vec<_>, _>>()?;
            let (answer, size) = accumulation_candidate(&samples, config.cluster_tolerance.as_ref())?;
            let accepted = match &config.cluster_tolerance {
                None => verdict(target, &answer, &reference, seed)? == Verdict::Accept,
                Some(tol) => answer.len() == reference.len() && max_distance(&answer, &reference) <= *tol,
            };
            Ok(GameTranscript {
                family: *desc,
                mode: GameMode::Numeric,
                strategy: summary,
                seed,
                quizmaster_message: Vec::new(),
                player_message: answer,
                reference,
                verdict: if accepted { Verdict::Accept } else { Verdict::Reject },
                approx: Some(ApproxDetail { series_message: Vec::new(), player_series: Vec::new(), samples, cluster_size: Some(size) }),
                hidden_withheld: false,
                hidden: Some(hidden),
            })
        }
    }
}

fn max_distance(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(Rational::zero)
}

/// The last sample of the tail half, provided at least half of the tail lies
/// within the tolerance of it.
fn accumulation_candidate(samples: &[Vec<Rational>], tol: Option<&Rational>) -> Result<(Vec<Rational>, usize), ProtocolError> {
    let tail = &samples[samples.len() / 2..];
    let center = tail.last().ok_or(ProtocolError::NoStableCluster)?;
    let zero = Rational::zero();
    let tol = tol.unwrap_or(&zero);
    let size = tail.iter().filter(|s| max_distance(s, center) <= *tol).count();
    if 2 * size >= tail.len() {
        Ok((center.clone(), size))
    } else {
        Err(ProtocolError::NoStableCluster)
    }
}

/// Draws points of the `θ`-fiber through `base`: any point with `t = 0` for the
/// families that degenerate there, and the rational roots of unity for `θ_D`.
fn fiber_sampler(desc: &FamilyDescriptor, base: &[Rational]) -> Result<Box<dyn FnMut(&mut ChaCha8Rng) -> Vec<Rational>>, ProtocolError> {
    let arity = desc.param_arity();
    if base.len() != arity {
        return Err(ProtocolError::Incompatible(format!("base has {} coordinates, family needs {arity}", base.len())));
    }
    match desc.variant {
        Variant::UnivariateD { d } => {
            let mut roots = vec![Rational::one()];
            if d % 2 == 1 {
                roots.push(Rational::from(-1));
            }
            if !roots.contains(&base[0]) {
                return Err(ProtocolError::NoFiberSampler(format!("{} at t = {}", desc.variant, base[0])));
            }
            Ok(Box::new(move |rng| vec![roots[rng.gen_range(0..roots.len())].clone()]))
        }
        _ => {
            if !base[0].is_zero() {
                return Err(ProtocolError::NoFiberSampler(format!("{} at t = {} != 0", desc.variant, base[0])));
            }
            Ok(Box::new(move |rng| {
                std::iter::once(Rational::zero())
                    .chain((1..arity).map(|_| Rational::from(rng.gen_range(-9i64..=9))))
                    .collect()
            }))
        }
    }
}

pub fn sample_fiber(desc: &FamilyDescriptor, base: &[Rational], samples: usize, seed: u64) -> Result<Vec<Vec<Rational>>, ProtocolError> {
    let mut draw = fiber_sampler(desc, base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..samples).map(|_| draw(&mut rng)).collect())
}

/// Distinct player answers over sampled points of the fiber through `base`.
pub fn fiber_image(
    desc: &FamilyDescriptor,
    strategy: &Strategy,
    base: &[Rational],
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<Rational>>, ProtocolError> {
    strategy.check(desc)?;
    let circuit = build_circuit(&desc.base())?;
    let mut seen: BTreeMap<String, Vec<Rational>> = BTreeMap::new();
    let mut order = Vec::new();
    for v in sample_fiber(desc, base, samples, seed)? {
        let (_, answer) = player_answer(desc, strategy, &circuit, &v)?;
        let key = format!("{answer:?}");
        if !seen.contains_key(&key) {
            order.push(key.clone());
            seen.insert(key, answer);
        }
    }
    Ok(order.into_iter().map(|k| seen.remove(&k).expect("recorded")).collect())
}
