//! Feature extraction: a static sparse binary projection into a wide layer,
//! followed by per-sample dynamic thresholding and ReLU.
//!
//! For an input `u` the projection is `z = W·u`; with `mu` and `sigma` the
//! mean and population standard deviation of the entries of `z`, each output
//! unit is `max(0, z_i - mu - k*sigma)`. Only units driven well above the
//! sample's own average survive, so the representation is sparse.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{NnaError, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderConfig {
    /// Zero means "take it from the data" when built by an experiment.
    #[serde(default)]
    pub input_dim: usize,
    pub expansion_dim: usize,
    /// Cutoff `k` in units of the per-sample standard deviation.
    pub cutoff: f64,
    /// Probability that a projection entry is 1.
    pub density: f64,
    #[serde(default)]
    pub weight_seed: u64,
    #[serde(default = "yes")]
    pub threshold_enabled: bool,
    #[serde(default)]
    pub bypass: bool,
}

fn yes() -> bool {
    true
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            input_dim: 784,
            expansion_dim: 10_000,
            cutoff: 1.0,
            density: 0.1,
            weight_seed: 0,
            threshold_enabled: true,
            bypass: false,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || (!self.bypass && self.expansion_dim == 0) {
            return Err(NnaError::InvalidConfig(
                "encoder input and expansion dimensions must be positive".into(),
            ));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(NnaError::InvalidConfig(format!(
                "projection density must lie in (0, 1], got {}",
                self.density
            )));
        }
        if !self.cutoff.is_finite() {
            return Err(NnaError::InvalidConfig("cutoff must be finite".into()));
        }
        Ok(())
    }

    /// Width of the encoded representation.
    pub fn output_dim(&self) -> usize {
        if self.bypass {
            self.input_dim
        } else {
            self.expansion_dim
        }
    }
}

/// The built projection, stored column-wise: for every input channel the
/// list of expansion units it feeds.
#[derive(Debug, Clone)]
pub struct Encoder {
    config: EncoderConfig,
    col_start: Vec<usize>,
    rows: Vec<u32>,
}

impl Encoder {
    /// Draw the projection: entry `(r, c)` is 1 with probability `density`,
    /// drawn in row-major order from the seeded generator.
    pub fn build(config: EncoderConfig) -> Result<Self> {
        config.validate()?;
        if config.bypass {
            return Ok(Encoder {
                config,
                col_start: Vec::new(),
                rows: Vec::new(),
            });
        }
        let (kappa, alpha) = (config.expansion_dim, config.input_dim);
        let mut rng = rng::seeded(config.weight_seed, 0xe2c0_de00);
        let mut per_col: Vec<Vec<u32>> = vec![Vec::new(); alpha];
        let dense = config.density >= 1.0;
        for r in 0..kappa {
            for col in per_col.iter_mut() {
                if dense || rng.gen::<f64>() < config.density {
                    col.push(r as u32);
                }
            }
        }
        let mut col_start = Vec::with_capacity(alpha + 1);
        let mut rows = Vec::with_capacity(per_col.iter().map(Vec::len).sum());
        col_start.push(0);
        for col in per_col {
            rows.extend_from_slice(&col);
            col_start.push(rows.len());
        }
        Ok(Encoder {
            config,
            col_start,
            rows,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn output_dim(&self) -> usize {
        self.config.output_dim()
    }

    /// Number of ones in the projection.
    pub fn nonzeros(&self) -> usize {
        self.rows.len()
    }

    /// Whether projection entry (row `r`, input `c`) is 1.
    pub fn entry(&self, r: usize, c: usize) -> bool {
        self.rows[self.col_start[c]..self.col_start[c + 1]]
            .binary_search(&(r as u32))
            .is_ok()
    }

    /// The raw projection `W·u`.
    pub fn project(&self, u: &[f32]) -> Result<Vec<f64>> {
        let mut z = vec![0.0; self.config.expansion_dim];
        self.project_into(u, &mut z)?;
        Ok(z)
    }

    fn project_into(&self, u: &[f32], z: &mut [f64]) -> Result<()> {
        if u.len() != self.config.input_dim {
            return Err(NnaError::DimensionMismatch {
                expected: self.config.input_dim,
                actual: u.len(),
            });
        }
        z.fill(0.0);
        for (c, &v) in u.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let v = f64::from(v);
            for &r in &self.rows[self.col_start[c]..self.col_start[c + 1]] {
                z[r as usize] += v;
            }
        }
        Ok(())
    }

    /// Encode one input vector into a fresh buffer.
    pub fn encode(&self, u: &[f32]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.output_dim()];
        self.encode_into(u, &mut out)?;
        Ok(out)
    }

    /// Encode into `out`, which must have length [`Encoder::output_dim`].
    pub fn encode_into(&self, u: &[f32], out: &mut [f64]) -> Result<()> {
        if self.config.bypass {
            if u.len() != self.config.input_dim {
                return Err(NnaError::DimensionMismatch {
                    expected: self.config.input_dim,
                    actual: u.len(),
                });
            }
            for (o, &v) in out.iter_mut().zip(u) {
                *o = f64::from(v);
            }
            return Ok(());
        }
        self.project_into(u, out)?;
        if self.config.threshold_enabled {
            dynamic_threshold(out, self.config.cutoff);
        } else {
            relu(out);
        }
        Ok(())
    }
}

/// In place: `z_i <- max(0, z_i - mean(z) - k * std(z))` with the population
/// standard deviation.
pub fn dynamic_threshold(z: &mut [f64], k: f64) {
    if z.is_empty() {
        return;
    }
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let cut = mean + k * var.sqrt();
    for v in z.iter_mut() {
        *v = (*v - cut).max(0.0);
    }
}

pub fn relu(z: &mut [f64]) {
    for v in z.iter_mut() {
        *v = v.max(0.0);
    }
}

/// Fraction of strictly positive entries.
pub fn sparsity_fraction(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().filter(|&&v| v > 0.0).count() as f64 / x.len() as f64
}
