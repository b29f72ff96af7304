//! The neuromodulated learning layer.
//!
//! A single plastic weight matrix `W` (outputs × inputs) maps the encoded
//! representation to outputs `x_o = tanh(relu(W·x_e))`. Learning is local:
//! each synapse `(j, i)` changes using only its presynaptic activity
//! `x_e[i]`, postsynaptic activity `x_o[j]`, the modulatory (label) signal
//! `x_m[j]`, its own weight, and for the inelastic rule the mean weight of the
//! layer. There is no backpropagated error.

mod checkpoint;
mod rules;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{NnaError, Result};
use crate::rng;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use rules::{
    clamp, evolve_beta, forward, inel_gate, update_gen, update_inel, update_mse, update_oja,
    DeltaW,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Rule {
    /// Modulated covariance rule.
    Gen,
    /// Modulated Oja rule.
    Oja,
    /// Delta rule on the label error.
    Mse,
    /// Delta rule gated by each weight's distance from the mean weight.
    Inel,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::Gen, Rule::Oja, Rule::Mse, Rule::Inel];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Gen => "GEN",
            Rule::Oja => "OJA",
            Rule::Mse => "MSE",
            Rule::Inel => "INEL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampMode {
    /// Clip to `[-c, c]`.
    Symmetric,
    /// Clip to `[0, c]`.
    Positive,
    None,
}

/// Reference population for the inelastic rule's mean weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuScope {
    #[default]
    Layer,
    PerNeuron,
}

/// How the modulatory vector reaches the Hebbian rules (GEN, OJA).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    /// Row `j` is scaled by `x_m[j]`.
    #[default]
    PerRow,
    /// Every row is scaled by the scalar `sum(x_m)`.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub rule: Rule,
    #[serde(default)]
    pub beta1: f64,
    #[serde(default)]
    pub beta2: f64,
    #[serde(default)]
    pub beta3: f64,
    /// Learning rate at the first step.
    pub lr0: f64,
    pub clamp_mode: ClampMode,
    #[serde(default = "one")]
    pub clamp_bound: f64,
    #[serde(default)]
    pub filtered_mse: bool,
    #[serde(default)]
    pub inel_mu_scope: MuScope,
    #[serde(default)]
    pub modulation: Modulation,
    /// Initial weights are drawn uniformly from `[0, init_scale)`; zero gives
    /// an all-zero start.
    #[serde(default)]
    pub init_scale: f64,
    #[serde(default)]
    pub init_seed: u64,
}

fn one() -> f64 {
    1.0
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            rule: Rule::Mse,
            beta1: 0.0,
            beta2: 0.0,
            beta3: 0.0,
            lr0: 1e-3,
            clamp_mode: ClampMode::Symmetric,
            clamp_bound: 1.0,
            filtered_mse: false,
            inel_mu_scope: MuScope::Layer,
            modulation: Modulation::PerRow,
            init_scale: 0.0,
            init_seed: 0,
        }
    }
}

impl RuleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(NnaError::InvalidConfig(format!("lr0 must be > 0, got {}", self.lr0)));
        }
        if self.clamp_mode != ClampMode::None && !(self.clamp_bound > 0.0) {
            return Err(NnaError::InvalidConfig(format!(
                "clamp bound must be > 0, got {}",
                self.clamp_bound
            )));
        }
        if self.beta3 == -1.0 {
            return Err(NnaError::InvalidConfig("beta3 = -1 makes the rate evolution singular".into()));
        }
        for (name, v) in [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("init_scale", self.init_scale),
        ] {
            if !v.is_finite() {
                return Err(NnaError::InvalidConfig(format!("{name} must be finite")));
            }
        }
        if self.init_scale < 0.0 {
            return Err(NnaError::InvalidConfig("init_scale must be >= 0".into()));
        }
        Ok(())
    }
}

/// Plastic weights plus the current learning rate.
#[derive(Debug, Clone)]
pub struct Learner {
    config: RuleConfig,
    outputs: usize,
    inputs: usize,
    /// Row-major `outputs × inputs`.
    weights: Vec<f64>,
    lr: f64,
    /// Running per-row weight sums (inelastic mean weight).
    row_sums: Vec<f64>,
    steps: u64,
}

impl Learner {
    pub fn new(config: RuleConfig, outputs: usize, inputs: usize) -> Result<Self> {
        config.validate()?;
        if outputs == 0 || inputs == 0 {
            return Err(NnaError::InvalidConfig("learner needs at least one input and output".into()));
        }
        let mut weights = vec![0.0; outputs * inputs];
        if config.init_scale > 0.0 {
            let mut r = rng::seeded(config.init_seed, 0x1417_0000);
            for w in weights.iter_mut() {
                *w = r.gen::<f64>() * config.init_scale;
            }
        }
        Self::from_parts(config, outputs, inputs, weights, None)
    }

    /// Rebuild a learner from explicit weights (row-major) and rate.
    pub fn from_parts(
        config: RuleConfig,
        outputs: usize,
        inputs: usize,
        weights: Vec<f64>,
        lr: Option<f64>,
    ) -> Result<Self> {
        config.validate()?;
        if weights.len() != outputs * inputs {
            return Err(NnaError::DimensionMismatch {
                expected: outputs * inputs,
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(NnaError::Degenerate("non-finite weight".into()));
        }
        let mut weights = weights;
        clamp(&mut weights, config.clamp_mode, config.clamp_bound);
        let lr = lr.unwrap_or(config.lr0);
        let mut learner = Learner {
            config,
            outputs,
            inputs,
            weights,
            lr,
            row_sums: vec![0.0; outputs],
            steps: 0,
        };
        learner.resync_sums();
        Ok(learner)
    }

    pub fn config(&self) -> &RuleConfig {
        &self.config
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, j: usize, i: usize) -> f64 {
        self.weights[j * self.inputs + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.inputs..(j + 1) * self.inputs]
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Recompute the per-row sums from scratch.
    pub fn resync_sums(&mut self) {
        for j in 0..self.outputs {
            self.row_sums[j] = self.weights[j * self.inputs..(j + 1) * self.inputs].iter().sum();
        }
    }

    /// `x_o = tanh(relu(W·x_e))`.
    pub fn forward(&self, x_e: &[f64]) -> Result<Vec<f64>> {
        forward(&self.weights, self.outputs, x_e)
    }

    fn forward_sparse(&self, x_e: &[f64], active: &[usize]) -> Vec<f64> {
        (0..self.outputs)
            .map(|j| {
                let row = self.row(j);
                let a: f64 = active.iter().map(|&i| row[i] * x_e[i]).sum();
                a.max(0.0).tanh()
            })
            .collect()
    }

    /// Mean weight used by the inelastic gate for row `j`, restricted to
    /// `rows` when given.
    fn inel_mean(&self, rows: Option<&[usize]>, j: usize) -> f64 {
        match self.config.inel_mu_scope {
            MuScope::PerNeuron => self.row_sums[j] / self.inputs as f64,
            MuScope::Layer => match rows {
                Some(r) => r.iter().map(|&k| self.row_sums[k]).sum::<f64>() / (r.len() * self.inputs) as f64,
                None => self.row_sums.iter().sum::<f64>() / self.weights.len() as f64,
            },
        }
    }

    /// One online learning step on all output rows. See [`Learner::step_rows`].
    pub fn apply_step(&mut self, x_e: &[f64], x_m: &[f64]) -> Result<Vec<f64>> {
        self.step_rows(x_e, x_m, None)
    }

    /// One online learning step: forward pass, rule update, weight addition,
    /// clamping, then learning-rate evolution. Returns the output computed
    /// before the update.
    ///
    /// When `rows` is given only those output rows are plastic, and the
    /// inelastic layer mean and the filtered-MSE argmax are taken over them.
    pub fn step_rows(&mut self, x_e: &[f64], x_m: &[f64], rows: Option<&[usize]>) -> Result<Vec<f64>> {
        if x_e.len() != self.inputs {
            return Err(NnaError::DimensionMismatch {
                expected: self.inputs,
                actual: x_e.len(),
            });
        }
        if x_m.len() != self.outputs {
            return Err(NnaError::DimensionMismatch {
                expected: self.outputs,
                actual: x_m.len(),
            });
        }
        let active: Vec<usize> = (0..self.inputs).filter(|&i| x_e[i] != 0.0).collect();
        let x_o = self.forward_sparse(x_e, &active);

        let all_rows: Vec<usize>;
        let plastic: &[usize] = match rows {
            Some(r) => r,
            None => {
                all_rows = (0..self.outputs).collect();
                &all_rows
            }
        };

        let cfg = self.config.clone();
        let lr = self.lr;
        let (mode, c) = (cfg.clamp_mode, cfg.clamp_bound);
        let n = self.inputs;

        match cfg.rule {
            Rule::Mse | Rule::Inel => {
                let gated = cfg.filtered_mse && {
                    let label = argmax_over(x_m, plastic);
                    argmax_over(&x_o, plastic) == label
                };
                if !gated {
                    let mus: Vec<f64> = if cfg.rule == Rule::Inel {
                        plastic.iter().map(|&j| self.inel_mean(rows, j)).collect()
                    } else {
                        Vec::new()
                    };
                    for (p, &j) in plastic.iter().enumerate() {
                        let err = x_m[j] - x_o[j];
                        if err == 0.0 {
                            continue;
                        }
                        let scale = lr * err;
                        let row = &mut self.weights[j * n..(j + 1) * n];
                        let mut drift = 0.0;
                        for &i in &active {
                            let w = row[i];
                            if cfg.rule == Rule::Inel && 1.0 - cfg.beta1 * (w - mus[p]).abs() < 0.0 {
                                continue;
                            }
                            let nw = clamp_one(w + scale * x_e[i], mode, c);
                            drift += nw - w;
                            row[i] = nw;
                        }
                        self.row_sums[j] += drift;
                    }
                }
            }
            Rule::Gen | Rule::Oja => {
                let total_m: f64 = x_m.iter().sum();
                for &j in plastic {
                    let m = match cfg.modulation {
                        Modulation::PerRow => x_m[j],
                        Modulation::Global => total_m,
                    };
                    if m == 0.0 {
                        continue;
                    }
                    let row = &mut self.weights[j * n..(j + 1) * n];
                    let mut drift = 0.0;
                    if cfg.rule == Rule::Gen {
                        let post = lr * m * (x_o[j] - cfg.beta2);
                        if post == 0.0 {
                            continue;
                        }
                        for (i, w) in row.iter_mut().enumerate() {
                            let nw = clamp_one(*w + post * (x_e[i] - cfg.beta1), mode, c);
                            drift += nw - *w;
                            *w = nw;
                        }
                    } else {
                        let y = x_o[j];
                        if y == 0.0 {
                            continue;
                        }
                        let decay = cfg.beta1 * y * y;
                        for (i, w) in row.iter_mut().enumerate() {
                            let nw = clamp_one(*w + lr * m * (x_e[i] * y - decay * *w), mode, c);
                            drift += nw - *w;
                            *w = nw;
                        }
                    }
                    self.row_sums[j] += drift;
                }
            }
        }

        self.lr = evolve_beta(self.lr, cfg.lr0, cfg.beta3)?;
        self.steps += 1;
        Ok(x_o)
    }

    /// Mean presynaptic weight of every output neuron.
    pub fn weight_trace(&self) -> Vec<f64> {
        (0..self.outputs).map(|j| self.row_sums_exact(j) / self.inputs as f64).collect()
    }

    fn row_sums_exact(&self, j: usize) -> f64 {
        self.row(j).iter().sum()
    }

    /// Order-sensitive hash of the weights and rate, for purity checks.
    pub fn checksum(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for w in self.weights.iter().chain(std::iter::once(&self.lr)) {
            h ^= w.to_bits();
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

#[inline]
fn clamp_one(w: f64, mode: ClampMode, c: f64) -> f64 {
    match mode {
        ClampMode::Symmetric => w.clamp(-c, c),
        ClampMode::Positive => w.clamp(0.0, c),
        ClampMode::None => w,
    }
}

/// Index of the largest value among `among`; ties go to the lowest index.
pub(crate) fn argmax_over(v: &[f64], among: &[usize]) -> usize {
    let mut best = among[0];
    for &k in among {
        if v[k] > v[best] || (v[k] == v[best] && k < best) {
            best = k;
        }
    }
    best
}
