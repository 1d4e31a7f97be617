//! Two-neuron network with activations `Yⁿ` and `Y`, computing
//! `t·(u₁x₁ + ⋯ + uₙxₙ)ⁿ`, trained by full-batch gradient descent on the
//! mean squared error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact::Rational;
use crate::families::{expand_family, FamilyDescriptor, Variant};
use crate::identify::{sample_sequence, IdentificationSequence};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeuralError {
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyActivationNet {
    pub n: usize,
    /// `(t, u₁, …, uₙ)`
    pub weights: Vec<f64>,
}

impl PolyActivationNet {
    pub fn new(weights: Vec<f64>) -> Result<Self, NeuralError> {
        if weights.len() < 2 {
            return Err(NeuralError::InvalidConfig("need t and at least one u".into()));
        }
        Ok(PolyActivationNet { n: weights.len() - 1, weights })
    }

    fn inner(&self, x: &[f64]) -> f64 {
        self.weights[1..].iter().zip(x).map(|(u, x)| u * x).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64, NeuralError> {
        if x.len() != self.n {
            return Err(NeuralError::ArityMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.weights[0] * self.inner(x).powi(self.n as i32))
    }

    /// Mean of `(f(x) − y)²`.
    pub fn loss(&self, batch: &[Vec<f64>], targets: &[f64]) -> Result<f64, NeuralError> {
        let mut acc = 0.0;
        for (x, y) in batch.iter().zip(targets) {
            let d = self.forward(x)? - y;
            acc += d * d;
        }
        Ok(acc / batch.len() as f64)
    }

    /// `∂/∂t = mean 2(f−y)·s^n`, `∂/∂u_j = mean 2(f−y)·t·n·s^(n−1)·x_j` with `s = u·x`.
    pub fn gradient(&self, batch: &[Vec<f64>], targets: &[f64]) -> Result<Vec<f64>, NeuralError> {
        if batch.is_empty() || batch.len() != targets.len() {
            return Err(NeuralError::ArityMismatch { expected: batch.len(), got: targets.len() });
        }
        let n = self.n as i32;
        let t = self.weights[0];
        let mut g = vec![0.0; self.n + 1];
        for (x, y) in batch.iter().zip(targets) {
            if x.len() != self.n {
                return Err(NeuralError::ArityMismatch { expected: self.n, got: x.len() });
            }
            let s = self.inner(x);
            let sn1 = s.powi(n - 1);
            let r = 2.0 * (t * sn1 * s - y);
            g[0] += r * sn1 * s;
            for (gj, xj) in g[1..].iter_mut().zip(x) {
                *gj += r * t * n as f64 * sn1 * xj;
            }
        }
        let m = batch.len() as f64;
        Ok(g.into_iter().map(|v| v / m).collect())
    }
}

/// Largest `|analytic − central difference| / max(1, |analytic|)` over the weights.
pub fn finite_diff_check(net: &PolyActivationNet, batch: &[Vec<f64>], targets: &[f64], h: f64) -> Result<f64, NeuralError> {
    if h <= 0.0 {
        return Err(NeuralError::InvalidConfig("step must be positive".into()));
    }
    let analytic = net.gradient(batch, targets)?;
    let mut worst: f64 = 0.0;
    for (i, a) in analytic.iter().enumerate() {
        let mut plus = net.clone();
        plus.weights[i] += h;
        let mut minus = net.clone();
        minus.weights[i] -= h;
        let numeric = (plus.loss(batch, targets)? - minus.loss(batch, targets)?) / (2.0 * h);
        worst = worst.max((a - numeric).abs() / a.abs().max(1.0));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch: Vec<Vec<f64>>,
    /// Ignored when `target_weights` is supplied.
    pub targets: Vec<f64>,
    pub target_weights: Option<Vec<f64>>,
    pub initial_weights: Vec<f64>,
    pub seed: u64,
    /// Decimal digits kept when rationalizing weights for the exact distance.
    pub rounding_digits: u32,
}

pub const DIVERGENCE_LOSS: f64 = 1e12;

impl TrainConfig {
    /// Batch of `batch_size` points in `[−1, 1]ⁿ`, target weights and starting
    /// weights in `[−1, 1]`, all drawn from `seed`.
    pub fn random(n: usize, batch_size: usize, epochs: usize, learning_rate: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vector = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect() };
        let batch = (0..batch_size).map(|_| vector(n)).collect();
        let target_weights = Some(vector(n + 1));
        let initial_weights = vector(n + 1);
        TrainConfig { learning_rate, epochs, batch, targets: Vec::new(), target_weights, initial_weights, seed, rounding_digits: 6 }
    }

    fn validate(&self) -> Result<(), NeuralError> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(NeuralError::InvalidConfig("learning rate must be a nonnegative number".into()));
        }
        if self.epochs == 0 {
            return Err(NeuralError::InvalidConfig("epochs >= 1".into()));
        }
        if self.batch.is_empty() {
            return Err(NeuralError::InvalidConfig("empty batch".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum TrainStatus {
    Completed,
    Diverged { epoch: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub n: usize,
    pub seed: u64,
    pub status: TrainStatus,
    /// Loss before each epoch's update; the last entry is the final loss.
    pub losses: Vec<f64>,
    pub final_weights: Vec<f64>,
    /// Largest coefficient difference between the learned and the target
    /// polynomial, both expanded exactly from rounded weights.
    pub polynomial_distance: Option<Rational>,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,epoch,loss\n");
        for (e, l) in self.losses.iter().enumerate() {
            out.push_str(&format!("{},{e},{l:e}\n", self.seed));
        }
        out
    }
}

fn rationalize(w: &[f64], digits: u32) -> Option<Vec<Rational>> {
    w.iter().map(|&x| Rational::from_f64_rounded(x, digits)).collect()
}

pub fn train(config: &TrainConfig) -> Result<TrainReport, NeuralError> {
    config.validate()?;
    let mut net = PolyActivationNet::new(config.initial_weights.clone())?;
    let n = net.n;
    let targets = match &config.target_weights {
        Some(w) => {
            let teacher = PolyActivationNet::new(w.clone())?;
            if teacher.n != n {
                return Err(NeuralError::ArityMismatch { expected: n + 1, got: w.len() });
            }
            config.batch.iter().map(|x| teacher.forward(x)).collect::<Result<Vec<_>, _>>()?
        }
        None => config.targets.clone(),
    };
    let mut losses = Vec::with_capacity(config.epochs + 1);
    let mut status = TrainStatus::Completed;
    for epoch in 0..config.epochs {
        let loss = net.loss(&config.batch, &targets)?;
        losses.push(loss);
        if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            status = TrainStatus::Diverged { epoch };
            break;
        }
        let g = net.gradient(&config.batch, &targets)?;
        for (w, gi) in net.weights.iter_mut().zip(&g) {
            *w -= config.learning_rate * gi;
        }
    }
    if status == TrainStatus::Completed {
        losses.push(net.loss(&config.batch, &targets)?);
    }
    let polynomial_distance = match (&config.target_weights, status) {
        (Some(target), TrainStatus::Completed) => {
            let desc = FamilyDescriptor::identity(Variant::NeuralPower { n }).expect("n >= 1");
            let expand = |w: &[f64]| {
                rationalize(w, config.rounding_digits).and_then(|u| expand_family(&desc, &u, usize::MAX).ok())
            };
            match (expand(&net.weights), expand(target)) {
                (Some(a), Some(b)) => Some(a.max_coeff_distance(&b)),
                _ => None,
            }
        }
        _ => None,
    };
    Ok(TrainReport { n, seed: config.seed, status, losses, final_weights: net.weights, polynomial_distance })
}

/// `m = 4(KL + n + 1)² + 2` with `K = 2` neurons and `L = ⌈log₂ n⌉` layers,
/// coordinates of bit length at most `4(KL + 1)`.
pub fn interpolation_points(n: usize, seed: u64) -> IdentificationSequence {
    let k = 2;
    let l = (n.max(1) as f64).log2().ceil() as usize;
    let m = 4 * (k * l + n + 1).pow(2) + 2;
    let bits = (4 * (k * l + 1)).min(62) as u32;
    sample_sequence(n, m, 1u64 << bits, seed).expect("m >= 1")
}
