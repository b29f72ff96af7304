use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::encoder::EncoderConfig;
use crate::error::{NnaError, Result};
use crate::plasticity::{ClampMode, Modulation, MuScope, Rule, RuleConfig};
use crate::rng::{self, Rng};

/// A real interval, sampled uniformly or log-uniformly. `lo == hi` pins
/// the axis to one value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub log: bool,
}

impl Range {
    pub const fn linear(lo: f64, hi: f64) -> Self {
        Range { lo, hi, log: false }
    }

    pub const fn log(lo: f64, hi: f64) -> Self {
        Range { lo, hi, log: true }
    }

    pub const fn point(v: f64) -> Self {
        Range { lo: v, hi: v, log: false }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(NnaError::InvalidConfig(format!(
                "axis {name}: need finite lo <= hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.log && self.lo <= 0.0 {
            return Err(NnaError::InvalidConfig(format!("axis {name}: log scale needs lo > 0")));
        }
        Ok(())
    }

    /// One draw. Always consumes exactly one value from `rng`.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let u: f64 = rng.gen();
        if self.lo == self.hi {
            return self.lo;
        }
        if self.log {
            let (a, b) = (self.lo.ln(), self.hi.ln());
            (a + u * (b - a)).exp().clamp(self.lo, self.hi)
        } else {
            self.lo + u * (self.hi - self.lo)
        }
    }

    /// Integer draw from `[lo, hi]` (rounded).
    pub fn sample_int(&self, rng: &mut Rng) -> usize {
        let lo = self.lo.round();
        let hi = self.hi.round();
        let widened = Range {
            lo: if self.log { lo.max(1.0) } else { lo - 0.5 },
            hi: if self.log { hi } else { hi + 0.4999 },
            log: self.log,
        };
        (widened.sample(rng).round()).clamp(lo, hi) as usize
    }
}

/// Rule-specific replacements for the shared continuous axes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleAxes {
    pub beta1: Option<Range>,
    pub beta2: Option<Range>,
    pub beta3: Option<Range>,
    pub lr0: Option<Range>,
    pub clamp_bound: Option<Range>,
    pub init_scale: Option<Range>,
}

/// The mixed search space over encoder and rule settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpace {
    pub rules: Vec<Rule>,
    pub clamp_modes: Vec<ClampMode>,
    pub inel_mu_scopes: Vec<MuScope>,
    pub filtered_mse: Vec<bool>,
    pub modulation: Vec<Modulation>,
    pub expansion_dim: Range,
    pub cutoff: Range,
    pub density: Range,
    pub beta1: Range,
    pub beta2: Range,
    pub beta3: Range,
    pub lr0: Range,
    pub clamp_bound: Range,
    pub init_scale: Range,
    #[serde(default)]
    pub per_rule: BTreeMap<Rule, RuleAxes>,
}

/// The space shipped as `spaces/default.toml`.
pub const DEFAULT_SPACE_TOML: &str = include_str!("../../spaces/default.toml");

impl Default for ConfigSpace {
    fn default() -> Self {
        ConfigSpace::from_toml_str(DEFAULT_SPACE_TOML).expect("bundled space parses")
    }
}

impl ConfigSpace {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: ConfigSpace = toml::from_str(text).map_err(|e| NnaError::InvalidConfig(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| NnaError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| NnaError::Serialization(e.to_string()))
    }

    /// The same space restricted to one rule.
    pub fn only_rule(mut self, rule: Rule) -> Self {
        self.rules = vec![rule];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str, n: usize| {
            if n == 0 {
                Err(NnaError::InvalidConfig(format!("categorical axis {name} is empty")))
            } else {
                Ok(())
            }
        };
        empty("rules", self.rules.len())?;
        empty("clamp_modes", self.clamp_modes.len())?;
        empty("inel_mu_scopes", self.inel_mu_scopes.len())?;
        empty("filtered_mse", self.filtered_mse.len())?;
        empty("modulation", self.modulation.len())?;
        for (name, r) in [
            ("expansion_dim", self.expansion_dim),
            ("cutoff", self.cutoff),
            ("density", self.density),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("lr0", self.lr0),
            ("clamp_bound", self.clamp_bound),
            ("init_scale", self.init_scale),
        ] {
            r.validate(name)?;
        }
        if self.expansion_dim.lo < 1.0 {
            return Err(NnaError::InvalidConfig("expansion_dim must be >= 1".into()));
        }
        if !(self.density.lo > 0.0 && self.density.hi <= 1.0) {
            return Err(NnaError::InvalidConfig("density must lie in (0, 1]".into()));
        }
        if !(self.lr0.lo > 0.0) {
            return Err(NnaError::InvalidConfig("lr0 must be > 0".into()));
        }
        if self.beta3.lo <= -1.0 && self.beta3.hi >= -1.0 {
            return Err(NnaError::InvalidConfig("beta3 range must exclude -1".into()));
        }
        for (rule, axes) in &self.per_rule {
            for (name, r) in [
                ("beta1", axes.beta1),
                ("beta2", axes.beta2),
                ("beta3", axes.beta3),
                ("lr0", axes.lr0),
                ("clamp_bound", axes.clamp_bound),
                ("init_scale", axes.init_scale),
            ] {
                if let Some(r) = r {
                    r.validate(&format!("{}.{name}", rule.name()))?;
                }
            }
        }
        Ok(())
    }
}

fn pick<T: Copy>(rng: &mut Rng, from: &[T]) -> T {
    from[rng.gen_range(0..from.len())]
}

/// One sampled point of a [`ConfigSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledConfig {
    pub encoder: EncoderConfig,
    pub rule: RuleConfig,
}

/// Draw trial `trial_index` of the search seeded by `seed`. Every axis is
/// drawn in a fixed order whether or not the chosen rule uses it, so the
/// same `(seed, trial_index)` always yields the same point.
pub fn sample_config(space: &ConfigSpace, seed: u64, trial_index: usize) -> SampledConfig {
    let mut r = rng::seeded(seed, rng::mix(0x05ea_2c40, trial_index as u64));
    let rule = pick(&mut r, &space.rules);
    let clamp_mode = pick(&mut r, &space.clamp_modes);
    let inel_mu_scope = pick(&mut r, &space.inel_mu_scopes);
    let filtered_mse = pick(&mut r, &space.filtered_mse);
    let modulation = pick(&mut r, &space.modulation);
    let expansion_dim = space.expansion_dim.sample_int(&mut r).max(1);
    let cutoff = space.cutoff.sample(&mut r);
    let density = space.density.sample(&mut r);

    let o = space.per_rule.get(&rule).cloned().unwrap_or_default();
    let beta1 = o.beta1.unwrap_or(space.beta1).sample(&mut r);
    let beta2 = o.beta2.unwrap_or(space.beta2).sample(&mut r);
    let beta3 = o.beta3.unwrap_or(space.beta3).sample(&mut r);
    let lr0 = o.lr0.unwrap_or(space.lr0).sample(&mut r);
    let clamp_bound = o.clamp_bound.unwrap_or(space.clamp_bound).sample(&mut r);
    let init_scale = o.init_scale.unwrap_or(space.init_scale).sample(&mut r);

    SampledConfig {
        encoder: EncoderConfig {
            input_dim: 0,
            expansion_dim,
            cutoff,
            density,
            weight_seed: 0,
            threshold_enabled: true,
            bypass: false,
        },
        rule: RuleConfig {
            rule,
            beta1,
            beta2,
            beta3,
            lr0,
            clamp_mode,
            clamp_bound,
            filtered_mse,
            inel_mu_scope,
            modulation,
            init_scale,
            init_seed: 0,
        },
    }
}
