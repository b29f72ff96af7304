//! Dense, whole-matrix forms of the learning rules.
//!
//! [`Learner::step_rows`](super::Learner::step_rows) applies the same updates
//! row by row without materialising `ΔW`; these functions are the reference
//! forms and are what the property tests compare against scalar oracles.

use super::{argmax_over, ClampMode, Learner, Modulation, MuScope};
use crate::error::{NnaError, Result};

/// A dense weight change, row-major `outputs × inputs`.
pub type DeltaW = Vec<f64>;

/// `tanh(relu(W·x_e))` for a row-major `outputs × x_e.len()` matrix.
pub fn forward(weights: &[f64], outputs: usize, x_e: &[f64]) -> Result<Vec<f64>> {
    let n = x_e.len();
    if outputs == 0 || weights.len() != outputs * n {
        return Err(NnaError::DimensionMismatch {
            expected: weights.len() / outputs.max(1),
            actual: n,
        });
    }
    Ok(weights
        .chunks_exact(n)
        .map(|row| {
            let a: f64 = row.iter().zip(x_e).map(|(w, x)| w * x).sum();
            a.max(0.0).tanh()
        })
        .collect())
}

fn modulation(state: &Learner, x_m: &[f64]) -> Vec<f64> {
    match state.config.modulation {
        Modulation::PerRow => x_m.to_vec(),
        Modulation::Global => vec![x_m.iter().sum(); x_m.len()],
    }
}

/// Modulated covariance rule:
/// `ΔW[j,i] = lr · x_m[j] · (x_e[i] − β1) · (x_o[j] − β2)`.
pub fn update_gen(state: &Learner, x_e: &[f64], x_o: &[f64], x_m: &[f64]) -> DeltaW {
    let (b1, b2, lr) = (state.config.beta1, state.config.beta2, state.lr);
    let m = modulation(state, x_m);
    let mut dw = vec![0.0; state.outputs * state.inputs];
    for (j, row) in dw.chunks_exact_mut(state.inputs).enumerate() {
        let post = lr * m[j] * (x_o[j] - b2);
        for (d, &x) in row.iter_mut().zip(x_e) {
            *d = post * (x - b1);
        }
    }
    dw
}

/// Modulated Oja rule:
/// `ΔW[j,i] = lr · x_m[j] · (x_e[i]·x_o[j] − β1 · x_o[j]² · W[j,i])`.
pub fn update_oja(state: &Learner, x_e: &[f64], x_o: &[f64], x_m: &[f64]) -> DeltaW {
    let (b1, lr) = (state.config.beta1, state.lr);
    let m = modulation(state, x_m);
    let mut dw = vec![0.0; state.outputs * state.inputs];
    for (j, row) in dw.chunks_exact_mut(state.inputs).enumerate() {
        let y = x_o[j];
        let w = state.row(j);
        for (i, d) in row.iter_mut().enumerate() {
            *d = lr * m[j] * (x_e[i] * y - b1 * y * y * w[i]);
        }
    }
    dw
}

fn filtered(state: &Learner, x_o: &[f64], x_m: &[f64]) -> bool {
    if !state.config.filtered_mse {
        return false;
    }
    let all: Vec<usize> = (0..x_o.len()).collect();
    argmax_over(x_o, &all) == argmax_over(x_m, &all)
}

/// Delta rule on the label error: `ΔW[j,i] = lr · (x_m[j] − x_o[j]) · x_e[i]`.
///
/// With `filtered_mse` set the update is zero whenever the largest output
/// already sits at the label.
pub fn update_mse(state: &Learner, x_e: &[f64], x_o: &[f64], x_m: &[f64]) -> DeltaW {
    let mut dw = vec![0.0; state.outputs * state.inputs];
    if filtered(state, x_o, x_m) {
        return dw;
    }
    for (j, row) in dw.chunks_exact_mut(state.inputs).enumerate() {
        let err = state.lr * (x_m[j] - x_o[j]);
        for (d, &x) in row.iter_mut().zip(x_e) {
            *d = err * x;
        }
    }
    dw
}

/// Plasticity window of the inelastic rule: `K[j,i] = H(1 − β1·|W[j,i] − μ|)`
/// with `H(0) = 1`. `μ` is the mean of all weights or of row `j`.
pub fn inel_gate(weights: &[f64], outputs: usize, beta1: f64, scope: MuScope) -> Vec<bool> {
    let n = weights.len() / outputs.max(1);
    let layer_mu = weights.iter().sum::<f64>() / weights.len().max(1) as f64;
    weights
        .chunks_exact(n.max(1))
        .flat_map(|row| {
            let mu = match scope {
                MuScope::Layer => layer_mu,
                MuScope::PerNeuron => row.iter().sum::<f64>() / n as f64,
            };
            row.iter().map(move |w| 1.0 - beta1 * (w - mu).abs() >= 0.0)
        })
        .collect()
}

/// Inelastic rule: the MSE update masked by [`inel_gate`].
pub fn update_inel(state: &Learner, x_e: &[f64], x_o: &[f64], x_m: &[f64]) -> DeltaW {
    let k = inel_gate(&state.weights, state.outputs, state.config.beta1, state.config.inel_mu_scope);
    let mut dw = update_mse(state, x_e, x_o, x_m);
    for (d, open) in dw.iter_mut().zip(k) {
        if !open {
            *d = 0.0;
        }
    }
    dw
}

/// Clip every weight into the range implied by `mode`.
pub fn clamp(weights: &mut [f64], mode: ClampMode, bound: f64) {
    match mode {
        ClampMode::Symmetric => weights.iter_mut().for_each(|w| *w = w.clamp(-bound, bound)),
        ClampMode::Positive => weights.iter_mut().for_each(|w| *w = w.clamp(0.0, bound)),
        ClampMode::None => {}
    }
}

/// Learning-rate evolution: `lr' = (lr + lr0·β3) / (1 + β3)`.
pub fn evolve_beta(lr: f64, lr0: f64, beta3: f64) -> Result<f64> {
    if 1.0 + beta3 == 0.0 {
        return Err(NnaError::InvalidConfig("beta3 = -1 makes the rate evolution singular".into()));
    }
    Ok((lr + lr0 * beta3) / (1.0 + beta3))
}
