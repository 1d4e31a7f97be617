//! Batch front end. Every command prints one report holding the crate
//! version, the effective configuration and the command's result.
//!
//! Randomness: the command-level generator is `ChaCha8Rng` seeded with
//! `--seed`; library routines that run trials take their own stream `i` of
//! the same seed.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::approx::{closure_membership_demo, encode, ApproxError, GermInstance};
use crate::circuit::{generic_computation, generic_param_arity, CircuitError, DEFAULT_EXPANSION_CAP};
use crate::exact::{Rational, DEFAULT_PRECISION};
use crate::families::{build_circuit, emit_formula, expand_family, FamilyDescriptor, FamilyError, Task, Variant};
use crate::identify::{minimum_length, required_set_size, sample_sequence, verify_linear_span, IdentificationSequence, IdentifyError};
use crate::kronecker::{build_theta_matrix, char_poly, verify_lemma_identities, KroneckerError, DEFAULT_THETA_CAP};
use crate::neural::{finite_diff_check, train, NeuralError, PolyActivationNet, TrainConfig};
use crate::poly::{default_names, graded_support, Monomial, QPoly};
use crate::protocol::{
    fiber_image, run_approx, run_exact, ApproxGameConfig, GameTranscript, ProtocolError, Strategy,
};
use crate::witness::{
    exact_rank, hypercube_lk_matrix, kronecker_lk_matrix, lower_bound_report, roots_of_unity_rank, RootsVariant,
    WitnessError,
};

pub const VERSION: &str = concat!("quizlab ", env!("CARGO_PKG_VERSION"));
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

const ENV_HELP: &str = "Environment:
  QUIZLAB_EXPANSION_CAP  default for --expansion-cap (max terms in any expansion)
  QUIZLAB_DIMENSION_CAP  default for --dimension-cap (max coefficient-space dimension)

Exit codes: 0 success, 2 usage, 3 cap exceeded, 4 internal error";

#[derive(Parser, Debug, Serialize)]
#[command(name = "quizlab", version, about = "Exact experiments on families of polynomials and quiz games", after_help = ENV_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, env = "QUIZLAB_EXPANSION_CAP", default_value_t = DEFAULT_EXPANSION_CAP)]
    pub expansion_cap: usize,
    #[arg(long, global = true, env = "QUIZLAB_DIMENSION_CAP", default_value_t = DEFAULT_DIMENSION_CAP)]
    pub dimension_cap: usize,
    /// Record wall-clock time; reports are then no longer reproducible byte for byte.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Expand, evaluate or emit formulas for a family
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Build, evaluate and expand arithmetic circuits
    #[command(subcommand)]
    Circuit(CircuitCmd),
    /// Size, sample and verify identification sequences
    #[command(subcommand)]
    Idseq(IdseqCmd),
    /// Play exact or approximative quiz games
    #[command(subcommand)]
    Game(GameCmd),
    /// Exact-rank lower-bound witnesses
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Kronecker identities and characteristic polynomials
    #[command(subcommand)]
    Kron(KronCmd),
    /// Train polynomial-activation networks
    #[command(subcommand)]
    Neural(NeuralCmd),
    /// Approximative parameter instances and encodings
    #[command(subcommand)]
    Approx(ApproxCmd),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    EasyPowerSum,
    UnivariateD,
    NeuralPower,
    HypercubeShift,
    KroneckerDiag,
    BorderBinomial,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskArg {
    Identity,
    Derivative,
    Integral,
    Elimination,
    CharPoly,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Identity => Task::Identity,
            TaskArg::Derivative => Task::Derivative,
            TaskArg::Integral => Task::Integral,
            TaskArg::Elimination => Task::Elimination,
            TaskArg::CharPoly => Task::CharPoly,
        }
    }
}

/// Family selection flags. Which of `--l --n --d --k` are needed depends on the family.
#[derive(Args, Debug, Clone, Serialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = TaskArg::Identity)]
    pub task: TaskArg,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyCmd {
    /// Expand the task image at a parameter point.
    Expand {
        #[command(flatten)]
        family: FamilyArgs,
        /// Comma-separated rationals, e.g. `2,1/2,-3`.
        #[arg(long, allow_hyphen_values = true)]
        params: String,
    },
    /// Evaluate the task image at a parameter point and an input point.
    Eval {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Print the existential formula describing the hypercube family.
    EmitFormula {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitCmd {
    /// Build the family circuit and report its size.
    Build {
        #[command(flatten)]
        family: FamilyArgs,
    },
    Eval {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Expand the circuit and compare with the closed form.
    Expand {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, allow_hyphen_values = true)]
        params: String,
    },
    /// Size of the generic computation with `L` essential multiplications.
    Generic {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdseqCmd {
    /// Required sampling-set size and minimal length.
    Size {
        #[arg(long)]
        delta: u64,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        k: u64,
    },
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        set_size: u64,
    },
    /// Check a sequence file against a graded span or a family's base span.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, conflicts_with = "family")]
        max_degree: Option<u32>,
        #[command(flatten)]
        family: FamilyArgs,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Export {
    Audit,
    Quizmaster,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Symbolic,
    Numeric,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameCmd {
    /// Play the exact game against a hidden parameter point.
    Exact {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "hidden_t")]
        hidden: Option<String>,
        /// Fix only `t`; the remaining coordinates are drawn from the seed.
        #[arg(long, allow_hyphen_values = true)]
        hidden_t: Option<String>,
        /// Question points, `;` between points and `,` between coordinates.
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        #[arg(long, value_enum, default_value_t = Export::Audit)]
        export: Export,
    },
    /// Play the approximative game against a parameter germ.
    Approx {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        germ: GermArgs,
        /// Target polynomial, e.g. `2*X1*X2 - X2^2`; defaults to the germ's encoding.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Symbolic)]
        mode: ModeArg,
        #[arg(long, default_value_t = 20)]
        steps: u32,
        /// Cluster radius for numeric mode; `0` clusters by equality.
        #[arg(long, default_value = "1/1024")]
        tolerance: String,
        #[arg(long, value_enum, default_value_t = Export::Audit)]
        export: Export,
    },
    /// Distinct player answers over the fiber through a base point.
    Fiber {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, allow_hyphen_values = true)]
        base: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GermArgs {
    /// Components separated by `;`, terms `coef@exponent` separated by `,`,
    /// e.g. `1/2@-1;1@0;1@1`. Defaults to the border germ for border-binomial.
    #[arg(long, allow_hyphen_values = true)]
    pub germ: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootsArg {
    Base,
    Derivative,
    Integral,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessCmd {
    /// Repeated seeded rank trials for a family.
    Report {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// A single rank trial.
    Rank {
        #[command(flatten)]
        family: FamilyArgs,
    },
    RootsOfUnity {
        #[arg(long)]
        d: u32,
        #[arg(long, value_enum, default_value_t = RootsArg::Base)]
        variant: RootsArg,
    },
    /// Rank of the `L_k` matrix at random points.
    HypercubeLk {
        #[arg(long)]
        n: usize,
        /// Also build the matrix through characteristic polynomials and compare.
        #[arg(long)]
        kronecker_route: bool,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KronCmd {
    /// Check the three Kronecker identities at `(s, u)`.
    Verify {
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
    },
    /// Build the matrix at `(s, u)` and its characteristic polynomial.
    Charpoly {
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeuralCmd {
    /// Gradient descent from seeds `seed, seed+1, …`.
    Train {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 32)]
        batch: usize,
    },
    /// Compare the analytic gradient with central differences.
    Gradcheck {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        configs: usize,
        #[arg(long, default_value_t = 8)]
        batch: usize,
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxCmd {
    /// Limit polynomial of a germ and its first-order correction.
    Encode {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        germ: GermArgs,
    },
    /// Distance table approaching a target along the germ.
    Demo {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        germ: GermArgs,
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        let msg = e.to_string();
        match e {
            FamilyError::CapExceeded { what, .. } if what.contains("term") => CliError::Cap(format!("{msg} (--expansion-cap)")),
            FamilyError::CapExceeded { .. } => CliError::Cap(msg),
            FamilyError::CrossCheck(_) | FamilyError::Exact(_) => CliError::Internal(msg),
            _ => CliError::Usage(msg),
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        let msg = e.to_string();
        match e {
            CircuitError::ExpansionCapExceeded { .. } => CliError::Cap(format!("{msg} (--expansion-cap)")),
            CircuitError::ArityMismatch { .. } => CliError::Usage(msg),
            _ => CliError::Internal(msg),
        }
    }
}

impl From<KroneckerError> for CliError {
    fn from(e: KroneckerError) -> Self {
        match e {
            KroneckerError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<WitnessError> for CliError {
    fn from(e: WitnessError) -> Self {
        match e {
            WitnessError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            WitnessError::Family(f) => f.into(),
            WitnessError::Kronecker(k) => k.into(),
            WitnessError::PointCount { .. } | WitnessError::Unsupported(_) => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<IdentifyError> for CliError {
    fn from(e: IdentifyError) -> Self {
        match e {
            IdentifyError::Family(f) => f.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::Circuit(c) => c.into(),
            ApproxError::Family(f) => f.into(),
            ApproxError::Exact(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Family(f) => f.into(),
            ProtocolError::Circuit(c) => c.into(),
            ProtocolError::Approx(a) => a.into(),
            ProtocolError::Incompatible(_)
            | ProtocolError::NoFiberSampler(_)
            | ProtocolError::TooFewSamples { .. }
            | ProtocolError::NonIdentifyingPoints { .. }
            | ProtocolError::NoStableCluster => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// What a finished invocation produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `argv` (program name first), run the command and render its report.
/// Nothing is written to the process streams; `--output` files are written.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match render(&cli) {
        Ok(text) => match &cli.global.output {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome { code: 0, stdout: String::new(), stderr: String::new() },
                Err(e) => Outcome { code: 4, stdout: String::new(), stderr: format!("error: writing {}: {e}\n", path.display()) },
            },
            None => Outcome { code: 0, stdout: text, stderr: String::new() },
        },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

/// Result of one command: structured value plus an optional table.
struct Report {
    result: Value,
    table: Option<String>,
}

impl Report {
    fn of<T: Serialize>(v: &T) -> Self {
        Report { result: to_value(v), table: None }
    }

    fn with_table(mut self, table: String) -> Self {
        self.table = Some(table);
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Run the parsed command and render it in the requested format.
pub fn render(cli: &Cli) -> Result<String, CliError> {
    let start = Instant::now();
    let report = execute(cli)?;
    let elapsed = start.elapsed().as_millis() as u64;
    let config = to_value(cli);
    let name = command_name(&cli.command);
    match cli.global.format {
        Format::Json => {
            let mut env = Map::new();
            env.insert("version".into(), json!(VERSION));
            env.insert("command".into(), json!(name));
            env.insert("config".into(), config);
            if cli.global.timing {
                env.insert("elapsed_ms".into(), json!(elapsed));
            }
            env.insert("result".into(), report.result);
            let mut text = serde_json::to_string_pretty(&Value::Object(env)).expect("json");
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let mut out = format!("# {VERSION}\n# command: {name}\n# config: {config}\n");
            if cli.global.timing {
                out.push_str(&format!("# elapsed_ms: {elapsed}\n"));
            }
            out.push_str(&report.table.unwrap_or_else(|| key_value_table(&report.result)));
            Ok(out)
        }
    }
}

fn command_name(c: &Command) -> String {
    let v = to_value(c);
    let mut parts = Vec::new();
    let mut cur = &v;
    for _ in 0..2 {
        match cur {
            Value::Object(m) if m.len() == 1 => {
                let (k, inner) = m.iter().next().expect("one entry");
                parts.push(k.clone());
                cur = inner;
            }
            Value::String(s) => {
                parts.push(s.clone());
                break;
            }
            _ => break,
        }
    }
    parts.join(" ")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn key_value_table(v: &Value) -> String {
    let mut out = String::from("key,value\n");
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let s = match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                out.push_str(&format!("{},{}\n", csv_field(k), csv_field(&s)));
            }
        }
        other => out.push_str(&format!("value,{}\n", csv_field(&other.to_string()))),
    }
    out
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    s.trim().parse::<Rational>().map_err(|_| usage(format!("not a rational number: {s:?}")))
}

pub fn parse_rationals(s: &str) -> Result<Vec<Rational>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_rational).collect()
}

fn parse_points(s: &str, n: usize) -> Result<Vec<Vec<i64>>, CliError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let coords = p
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| usage(format!("not an integer: {x:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if coords.len() == n {
                Ok(coords)
            } else {
                Err(usage(format!("point {p:?} needs {n} coordinates")))
            }
        })
        .collect()
}

/// Germ text: components separated by `;`, terms `coef@exponent` separated by `,`.
pub fn parse_germ(s: &str, precision: usize) -> Result<GermInstance, CliError> {
    if precision == 0 {
        return Err(usage("--precision must be at least 1"));
    }
    let components = s
        .split(';')
        .map(|comp| {
            comp.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|term| {
                    let (c, e) = term.split_once('@').ok_or_else(|| usage(format!("germ term {term:?} lacks '@'")))?;
                    let e = e.trim().parse::<i64>().map_err(|_| usage(format!("bad exponent in {term:?}")))?;
                    Ok((e, parse_rational(c)?))
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GermInstance::from_terms(&components, precision))
}

/// Sum of monomials such as `3/2*X1^2*X2 - X2 + 1`. Variables are `X` or
/// `Y` when `nvars = 1`, otherwise `X1 … Xn`.
pub fn parse_poly(s: &str, nvars: usize) -> Result<QPoly, CliError> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(usage("empty polynomial"));
    }
    let mut terms = Vec::new();
    let mut start = 0;
    for (i, ch) in compact.char_indices() {
        if i > 0 && (ch == '+' || ch == '-') && !compact[..i].ends_with('^') {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    terms.push(&compact[start..]);
    let names = default_names(nvars);
    let mut poly = QPoly::zero_q(nvars);
    for term in terms {
        let (negative, body) = match term.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, term.strip_prefix('+').unwrap_or(term)),
        };
        if body.is_empty() {
            return Err(usage(format!("dangling sign in {s:?}")));
        }
        let mut coeff = Rational::one();
        let mut exps = vec![0u32; nvars];
        for factor in body.split('*') {
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, e.parse::<u32>().map_err(|_| usage(format!("bad exponent in {factor:?}")))?),
                None => (factor, 1),
            };
            let var = names.iter().position(|n| n == base).or((nvars == 1 && base == "Y").then_some(0));
            match var {
                Some(v) => exps[v] += exp,
                None => {
                    let c = parse_rational(base)?;
                    coeff = &coeff * &c.powi(exp as i32).map_err(|e| usage(e.to_string()))?;
                }
            }
        }
        if negative {
            coeff = -coeff;
        }
        poly = poly + QPoly::from_terms(nvars, &Rational::zero(), [(Monomial(exps), coeff)]);
    }
    Ok(poly)
}

impl FamilyArgs {
    pub fn descriptor(&self) -> Result<FamilyDescriptor, CliError> {
        let kind = self.family.ok_or_else(|| usage("--family is required"))?;
        let need = |v: Option<u32>, flag: &str| v.ok_or_else(|| usage(format!("{flag} is required for this family")));
        let need_n = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("{flag} is required for this family")));
        let variant = match kind {
            FamilyKind::EasyPowerSum => Variant::EasyPowerSum { l: need(self.l, "--l")?, n: need_n(self.n, "--n")? },
            FamilyKind::UnivariateD => Variant::UnivariateD { d: need(self.d, "--d")? },
            FamilyKind::NeuralPower => Variant::NeuralPower { n: need_n(self.n, "--n")? },
            FamilyKind::HypercubeShift => Variant::HypercubeShift { n: need_n(self.n, "--n")? },
            FamilyKind::KroneckerDiag => Variant::KroneckerDiag { k: need_n(self.k, "--k")? },
            FamilyKind::BorderBinomial => Variant::BorderBinomial { n: need(self.n.map(|n| n as u32), "--n")? },
        };
        Ok(FamilyDescriptor::new(variant, self.task.into())?)
    }
}

fn dimension_of(desc: &FamilyDescriptor) -> usize {
    desc.expected_terms().max(desc.base().expected_terms())
}

fn check_dimension(value: usize, what: &str, g: &GlobalArgs) -> Result<(), CliError> {
    if value > g.dimension_cap {
        return Err(CliError::Cap(format!(
            "{what} = {value} exceeds the dimension cap {} (--dimension-cap, QUIZLAB_DIMENSION_CAP)",
            g.dimension_cap
        )));
    }
    Ok(())
}

/// Descriptor with the dimension cap applied before any work starts.
fn family(args: &FamilyArgs, g: &GlobalArgs) -> Result<FamilyDescriptor, CliError> {
    let desc = args.descriptor()?;
    check_dimension(dimension_of(&desc), "coefficient dimension", g)?;
    Ok(desc)
}

fn params_for(desc: &FamilyDescriptor, text: &str) -> Result<Vec<Rational>, CliError> {
    let p = parse_rationals(text)?;
    if p.len() != desc.param_arity() {
        return Err(usage(format!("{} takes {} parameters, got {}", desc.variant, desc.param_arity(), p.len())));
    }
    Ok(p)
}

fn point_for(n: usize, text: &str) -> Result<Vec<Rational>, CliError> {
    let p = parse_rationals(text)?;
    if p.len() != n {
        return Err(usage(format!("expected {n} coordinates, got {}", p.len())));
    }
    Ok(p)
}

fn poly_report(p: &QPoly) -> Value {
    json!({ "text": p.to_string(), "term_count": p.term_count(), "polynomial": to_value(p) })
}

fn poly_table(p: &QPoly) -> String {
    let mut out = String::from("exponents,coefficient\n");
    for (m, c) in p.graded_terms() {
        let e: Vec<String> = m.0.iter().map(u32::to_string).collect();
        out.push_str(&format!("{},{}\n", e.join(" "), c));
    }
    out
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_nonzero(rng: &mut ChaCha8Rng, count: usize) -> Vec<Rational> {
    (0..count)
        .map(|_| {
            let v: i64 = rng.gen_range(1..=9);
            Rational::from(if rng.gen_bool(0.5) { v } else { -v })
        })
        .collect()
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Family(c) => family_cmd(c, g),
        Command::Circuit(c) => circuit_cmd(c, g),
        Command::Idseq(c) => idseq_cmd(c, g),
        Command::Game(c) => game_cmd(c, g),
        Command::Witness(c) => witness_cmd(c, g),
        Command::Kron(c) => kron_cmd(c, g),
        Command::Neural(c) => neural_cmd(c, g),
        Command::Approx(c) => approx_cmd(c, g),
    }
}

fn family_cmd(c: &FamilyCmd, g: &GlobalArgs) -> Result<Report, CliError> {
    match c {
        FamilyCmd::Expand { family: f, params } => {
            let desc = family(f, g)?;
            let u = params_for(&desc, params)?;
            let p = expand_family(&desc, &u, g.expansion_cap)?;
            Ok(Report { result: json!({ "family": desc, "params": u, "expansion": poly_report(&p) }), table: Some(poly_table(&p)) })
        }
        FamilyCmd::Eval { family: f, params, at } => {
            let desc = family(f, g)?;
            let u = params_for(&desc, params)?;
            let x = point_for(desc.output_arity(), at)?;
            let p = expand_family(&desc, &u, g.expansion_cap)?;
            let value = p.evaluate(&x).map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(Report::of(&json!({ "family": desc, "params": u, "at": x, "value": value })))
        }
        FamilyCmd::EmitFormula { n } => {
            if *n == 0 || *n > crate::families::MAX_FORMULA_N {
                return Err(CliError::Cap(format!("--n must lie in 1..={}", crate::families::MAX_FORMULA_N)));
            }
            let r = emit_formula(*n, g.seed);
            let table = format!("n,equations,symbols\n{},{},{}\n", r.n, r.equations, r.symbols);
            Ok(Report::of(&r).with_table(table))
        }
    }
}

fn circuit_cmd(c: &CircuitCmd, g: &GlobalArgs) -> Result<Report, CliError> {
    match c {
        CircuitCmd::Build { family: f } => {
            let desc = family(f, g)?;
            let circuit = build_circuit(&desc.base())?;
            let size = circuit.size();
            let table = format!("gates,leaves,essential_muls\n{},{},{}\n", size.gates, size.leaves, size.essential_muls);
            Ok(Report::of(&json!({ "family": desc.base(), "size": size, "circuit": circuit })).with_table(table))
        }
        CircuitCmd::Eval { family: f, params, at } => {
            let desc = family(f, g)?.base();
            let u = params_for(&desc, params)?;
            let x = point_for(desc.input_arity(), at)?;
            let value = build_circuit(&desc)?.evaluate(&u, &x)?;
            Ok(Report::of(&json!({ "family": desc, "params": u, "at": x, "value": value })))
        }
        CircuitCmd::Expand { family: f, params } => {
            let desc = family(f, g)?.base();
            let u = params_for(&desc, params)?;
            let p = build_circuit(&desc)?.expand(&u, g.expansion_cap)?;
            let closed = expand_family(&desc, &u, g.expansion_cap)?;
            let result = json!({
                "family": desc,
                "params": u,
                "expansion": poly_report(&p),
                "matches_closed_form": p == closed,
            });
            Ok(Report { result, table: Some(poly_table(&p)) })
        }
        CircuitCmd::Generic { l, n } => {
            let arity = generic_param_arity(*l, *n);
            check_dimension(arity, "parameter count", g)?;
            let size = generic_computation(*l, *n).size();
            Ok(Report::of(&json!({ "l": l, "n": n, "param_arity": arity, "size": size })))
        }
    }
}

fn idseq_cmd(c: &IdseqCmd, g: &GlobalArgs) -> Result<Report, CliError> {
    match c {
        IdseqCmd::Size { delta, l, k } => {
            let size = required_set_size(*delta, *l, *k)?;
            let len = minimum_length(*l as usize);
            let table = format!("delta,l,k,set_size,min_length\n{delta},{l},{k},{size},{len}\n");
            Ok(Report::of(&json!({ "set_size": size.to_string(), "min_length": len })).with_table(table))
        }
        IdseqCmd::Sample { n, m, set_size } => {
            check_dimension(n * m, "sequence size", g)?;
            let seq = sample_sequence(*n, *m, *set_size, g.seed)?;
            let text = seq.to_text();
            Ok(Report::of(&json!({ "sequence": seq, "text": text })).with_table(text))
        }
        IdseqCmd::Verify { input, max_degree, family: f } => {
            let text = std::fs::read_to_string(input).map_err(|e| usage(format!("reading {}: {e}", input.display())))?;
            let seq = IdentificationSequence::from_text(&text)?;
            let support = match (max_degree, f.family) {
                (Some(d), _) => graded_support(seq.n, *d),
                (None, Some(_)) => {
                    let desc = family(f, g)?;
                    if desc.input_arity() != seq.n {
                        return Err(IdentifyError::VariableMismatch(seq.n, desc.input_arity()).into());
                    }
                    desc.base_support()
                }
                (None, None) => return Err(usage("give --max-degree or a family")),
            };
            check_dimension(support.len(), "span dimension", g)?;
            let ok = verify_linear_span(&seq, &support);
            Ok(Report::of(&json!({ "n": seq.n, "points": seq.len(), "span_dimension": support.len(), "identifies": ok })))
        }
    }
}

fn exported(t: GameTranscript, export: Export) -> GameTranscript {
    match export {
        Export::Audit => t,
        Export::Quizmaster => t.quizmaster_export(),
    }
}

fn germ_for(desc: &FamilyDescriptor, args: &GermArgs) -> Result<GermInstance, CliError> {
    match (&args.germ, desc.variant) {
        (Some(text), _) => parse_germ(text, args.precision),
        (None, Variant::BorderBinomial { n }) => {
            let g = GermInstance::border(n);
            Ok(GermInstance::new(g.components, args.precision.max(1)))
        }
        (None, _) => Err(usage("--germ is required for this family")),
    }
}

fn target_for(desc: &FamilyDescriptor, germ: &GermInstance, text: &Option<String>) -> Result<QPoly, CliError> {
    match text {
        Some(t) => parse_poly(t, desc.input_arity()),
        None => Ok(encode(germ, desc, germ.precision)?.h),
    }
}

fn game_cmd(c: &GameCmd, g: &GlobalArgs) -> Result<Report, CliError> {
    match c {
        GameCmd::Exact { family: f, hidden, hidden_t, points, export } => {
            let desc = family(f, g)?;
            let mut r = rng(g.seed);
            let u = match (hidden, hidden_t) {
                (Some(h), _) => params_for(&desc, h)?,
                (None, t) => {
                    let mut u = random_nonzero(&mut r, desc.param_arity());
                    if let Some(t) = t {
                        u[0] = parse_rational(t)?;
                    }
                    u
                }
            };
            let strategy = match points {
                Some(p) => Strategy::with_points(
                    &desc,
                    IdentificationSequence::from_points(desc.input_arity(), parse_points(p, desc.input_arity())?),
                ),
                None => Strategy::builtin(&desc, g.seed)?,
            };
            Ok(Report::of(&exported(run_exact(&desc, &strategy, &u)?, *export)))
        }
        GameCmd::Approx { family: f, germ, target, mode, steps, tolerance, export } => {
            let desc = family(f, g)?;
            let germ = germ_for(&desc, germ)?;
            let h = target_for(&desc, &germ, target)?;
            let config = match mode {
                ModeArg::Symbolic => ApproxGameConfig::symbolic(germ),
                ModeArg::Numeric => {
                    let tol = parse_rational(tolerance)?;
                    ApproxGameConfig::numeric(germ, *steps, (!tol.is_zero()).then_some(tol))
                }
            };
            let strategy = Strategy::builtin(&desc, g.seed)?;
            Ok(Report::of(&exported(run_approx(&desc, &strategy, &config, &h)?, *export)))
        }
        GameCmd::Fiber { family: f, base, samples } => {
            let desc = family(f, g)?;
            let base = params_for(&desc, base)?;
            let strategy = Strategy::builtin(&desc, g.seed)?;
            let answers = fiber_image(&desc, &strategy, &base, *samples, g.seed)?;
            Ok(Report::of(&json!({
                "family": desc,
                "base": base,
                "samples": samples,
                "distinct_answers": answers.len(),
                "answers": answers,
            })))
        }
    }
}

fn witness_cmd(c: &WitnessCmd, g: &GlobalArgs) -> Result<Report, CliError> {
    match c {
        WitnessCmd::Report { family: f, trials } => {
            let desc = family(f, g)?;
            let mut report = lower_bound_report(&desc, *trials, g.seed)?;
            if !g.timing {
                report.elapsed_ms = None;
            }
            let table = report.to_csv();
            Ok(Report::of(&report).with_table(table))
        }
        WitnessCmd::Rank { family: f } => {
            let desc = family(f, g)?;
            let r = lower_bound_report(&desc, 1, g.seed)?;
            Ok(Report::of(&json!({
                "family": desc,
                "expected_rank": r.expected_rank,
                "rank": r.achieved_rank,
                "rows": r.matrix_rows,
                "cols": r.matrix_cols,
                "full_rank": r.achieved_rank == r.expected_rank,
            })))
        }
        WitnessCmd::RootsOfUnity { d, variant } => {
            let v = match variant {
                RootsArg::Base => RootsVariant::Base,
                RootsArg::Derivative => RootsVariant::Derivative,
                RootsArg::Integral => RootsVariant::Integral,
            };
            check_dimension(*d as usize + 2, "D + 2", g)?;
            let r = roots_of_unity_rank(*d, v)?;
            let variant = to_value(&r.variant);
            let table = format!(
                "d,variant,prime,root,rows,cols,rank\n{},{},{},{},{},{},{}\n",
                r.d,
                variant.as_str().unwrap_or_default(),
                r.prime,
                r.root,
                r.rows,
                r.cols,
                r.rank
            );
            Ok(Report::of(&r).with_table(table))
        }
        WitnessCmd::HypercubeLk { n, kronecker_route } => {
            if *n == 0 || *n > 16 {
                return Err(usage("--n must lie in 1..=16"));
            }
            let count = 1usize << n;
            check_dimension(count, "2^n", g)?;
            let desc = FamilyDescriptor::identity(Variant::HypercubeShift { n: *n })?;
            let bound = crate::witness::sample_box(&desc, count);
            let mut r = rng(g.seed);
            let points: Vec<Vec<Rational>> = (0..count)
                .map(|_| (0..*n).map(|_| Rational::from(r.gen_range(1..=bound) as i64)).collect())
                .collect();
            let m = hypercube_lk_matrix(*n, &points)?;
            let rank = exact_rank(&m);
            let mut result = json!({
                "n": n,
                "points": points,
                "sample_box": bound,
                "rows": m.rows(),
                "cols": m.cols(),
                "rank": rank,
                "full_rank": rank == count,
            });
            if *kronecker_route {
                let k = kronecker_lk_matrix(*n, &points)?;
                result["kronecker_route_agrees"] = json!(k == m);
            }
            Ok(Report::of(&result))
        }
    }
}

fn theta_args(k: usize, s: &Option<String>, u: &Option<String>, g: &GlobalArgs) -> Result<(Rational, Vec<Rational>), CliError> {
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if k > DEFAULT_THETA_CAP {
        return Err(KroneckerError::CapExceeded { k, cap: DEFAULT_THETA_CAP }.into());
    }
    check_dimension(1 << k, "2^k", g)?;
    let mut r = rng(g.seed);
    let s = match s {
        Some(s) => parse_rational(s)?,
        None => random_nonzero(&mut r, 1).remove(0),
    };
    let u = match u {
        Some(u) => point_for(k, u)?,
        None => random_nonzero(&mut r, k),
    };
    Ok((s, u))
}

fn kron_cmd(c: &KronCmd, g: &GlobalArgs) -> Result<Report, CliError> {
    match c {
        KronCmd::Verify { k, s, u } => {
            let (s, u) = theta_args(*k, s, u, g)?;
            let (a, b, c) = verify_lemma_identities(*k, &s, &u)?;
            let table = format!("k,identity_1,identity_2,identity_3\n{k},{a},{b},{c}\n");
            Ok(Report::of(&json!({ "k": k, "s": s, "u": u, "identities": [a, b, c], "all_hold": a && b && c })).with_table(table))
        }
        KronCmd::Charpoly { k, s, u } => {
            let (s, u) = theta_args(*k, s, u, g)?;
            let theta = build_theta_matrix(*k, &s, &u, DEFAULT_THETA_CAP)?;
            let p = char_poly(&theta.matrix);
            Ok(Report {
                result: json!({ "k": k, "s": s, "u": u, "matrix": theta.matrix, "ops": theta.ops, "char_poly": poly_report(&p) }),
                table: Some(poly_table(&p)),
            })
        }
    }
}

fn neural_cmd(c: &NeuralCmd, g: &GlobalArgs) -> Result<Report, CliError> {
    match c {
        NeuralCmd::Train { n, runs, epochs, lr, batch } => {
            if *n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            check_dimension(*n + 1, "weight count", g)?;
            let reports = (0..*runs)
                .map(|i| train(&TrainConfig::random(*n, *batch, *epochs, *lr, g.seed + i)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut table = String::from("seed,epoch,loss\n");
            for r in &reports {
                table.extend(r.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
            }
            Ok(Report::of(&json!({ "runs": reports })).with_table(table))
        }
        NeuralCmd::Gradcheck { n, configs, batch, h } => {
            if *n == 0 || *batch == 0 {
                return Err(usage("--n and --batch must be at least 1"));
            }
            if !(*h > 0.0 && h.is_finite()) {
                return Err(usage("--h must be a positive number"));
            }
            let mut r = rng(g.seed);
            let mut vector = |len: usize| -> Vec<f64> { (0..len).map(|_| r.gen_range(-1.0..=1.0)).collect() };
            let mut errors = Vec::with_capacity(*configs);
            for _ in 0..*configs {
                let net = PolyActivationNet::new(vector(n + 1))?;
                let xs: Vec<Vec<f64>> = (0..*batch).map(|_| vector(*n)).collect();
                let ys = vector(*batch);
                errors.push(finite_diff_check(&net, &xs, &ys, *h)?);
            }
            let worst = errors.iter().copied().fold(0.0, f64::max);
            let mut table = String::from("config,max_relative_error\n");
            for (i, e) in errors.iter().enumerate() {
                table.push_str(&format!("{i},{e:e}\n"));
            }
            Ok(Report::of(&json!({ "n": n, "configs": configs, "h": h, "errors": errors, "worst": worst })).with_table(table))
        }
    }
}

fn approx_cmd(c: &ApproxCmd, g: &GlobalArgs) -> Result<Report, CliError> {
    match c {
        ApproxCmd::Encode { family: f, germ } => {
            let desc = family(f, g)?;
            let germ = germ_for(&desc, germ)?;
            let e = encode(&germ, &desc, germ.precision)?;
            Ok(Report::of(&json!({
                "family": desc,
                "germ": germ,
                "h": poly_report(&e.h),
                "h_prime_leading": poly_report(&e.h_prime_leading),
                "holomorphic": e.holomorphic,
                "pole": e.pole,
                "precision_used": e.precision_used,
            })))
        }
        ApproxCmd::Demo { family: f, germ, target } => {
            let desc = family(f, g)?;
            let germ = germ_for(&desc, germ)?;
            let h = target_for(&desc, &germ, target)?;
            let r = closure_membership_demo(&desc, &h, &germ)?;
            let mut table = String::from("k,eps,distance\n");
            for row in &r.rows {
                table.push_str(&format!("{},{},{}\n", row.k, row.eps, row.distance));
            }
            Ok(Report::of(&r).with_table(table))
        }
    }
}
