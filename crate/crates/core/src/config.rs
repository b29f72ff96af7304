//! Experiment configuration files and the seeded run they describe.
//!
//! A config is a TOML document. Unknown keys are rejected at every level.
//!
//! ```toml
//! dataset = "mnist"
//! scenario = "single_task"   # or task_incremental, class_incremental
//! epochs = 1.0
//! seed = 7
//! repetitions = 1
//!
//! [encoder]
//! expansion_dim = 10000
//! cutoff = 1.0
//! density = 0.1
//!
//! [rule]
//! rule = "MSE"
//! lr0 = 0.001
//! clamp_mode = "symmetric"
//! ```
//!
//! Each repetition `r` runs with seed `mix(seed, r)`; the encoder projection,
//! initial weights and stream order are drawn from independent children of
//! that seed, overriding `encoder.weight_seed` and `rule.init_seed`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataio::{self, build_curriculum, consecutive_groups, DatasetKind, DatasetSplit, Sampling, Scenario};
use crate::encoder::{Encoder, EncoderConfig};
use crate::engine::{run_curriculum, RunOptions, RunRecord, RunReport, RunResult};
use crate::error::{NnaError, Result};
use crate::plasticity::{Learner, RuleConfig};
use crate::rng;

/// Which partition a run is scored on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSplit {
    #[default]
    Test,
    /// The `holdout` samples split off the training set.
    Validation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    /// Data root, or the dataset's own directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_dir: Option<PathBuf>,
    pub scenario: Scenario,
    /// Explicit class partition. Empty means one task of every class for
    /// single-task runs, or consecutive groups of `classes_per_task`.
    #[serde(default)]
    pub tasks: Vec<Vec<usize>>,
    #[serde(default = "two")]
    pub classes_per_task: usize,
    #[serde(default = "one_epoch")]
    pub epochs: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Training samples moved to the validation partition.
    #[serde(default)]
    pub holdout: usize,
    #[serde(default)]
    pub holdout_seed: u64,
    #[serde(default)]
    pub evaluate_on: EvalSplit,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default = "trace_every")]
    pub trace_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub encoder: EncoderConfig,
    pub rule: RuleConfig,
}

fn two() -> usize {
    2
}
fn one() -> usize {
    1
}
fn one_epoch() -> f64 {
    1.0
}
fn trace_every() -> usize {
    500
}

impl ExperimentConfig {
    /// A single-task config with default encoder and rule settings.
    pub fn new(dataset: DatasetKind, scenario: Scenario, rule: RuleConfig) -> Self {
        ExperimentConfig {
            dataset,
            data_dir: None,
            scenario,
            tasks: Vec::new(),
            classes_per_task: 2,
            epochs: 1.0,
            seed: 0,
            repetitions: 1,
            holdout: 0,
            holdout_seed: 0,
            evaluate_on: EvalSplit::Test,
            sampling: Sampling::Permutation,
            trace_every: 500,
            out_dir: None,
            encoder: EncoderConfig {
                input_dim: 0,
                ..EncoderConfig::default()
            },
            rule,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| NnaError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| NnaError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| NnaError::Serialization(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?).map_err(|e| NnaError::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NnaError::InvalidConfig(m));
        if !(self.epochs > 0.0 && self.epochs.is_finite()) {
            return bad(format!("epochs must be > 0, got {}", self.epochs));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if self.classes_per_task == 0 {
            return bad("classes_per_task must be >= 1".into());
        }
        if self.evaluate_on == EvalSplit::Validation && self.holdout == 0 {
            return bad("evaluate_on = \"validation\" needs holdout > 0".into());
        }
        if self.scenario == Scenario::SingleTask && self.tasks.len() > 1 {
            return bad("single_task takes at most one class set".into());
        }
        let mut enc = self.encoder.clone();
        enc.input_dim = enc.input_dim.max(1);
        enc.validate()?;
        self.rule.validate()
    }

    /// Short stable digest of the whole config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    /// The class partition used for `class_count` classes.
    pub fn partition(&self, class_count: usize) -> Vec<Vec<usize>> {
        if !self.tasks.is_empty() {
            return self.tasks.clone();
        }
        match self.scenario {
            Scenario::SingleTask => Vec::new(),
            _ => consecutive_groups(class_count, self.classes_per_task),
        }
    }

    /// Locate the dataset directory: `override_dir`, else `data_dir`, else
    /// `env_dir`. A root holding the dataset's conventional subdirectory
    /// resolves to that subdirectory.
    pub fn resolve_data_dir(&self, override_dir: Option<&Path>, env_dir: Option<&Path>) -> Result<PathBuf> {
        let root = override_dir
            .or(self.data_dir.as_deref())
            .or(env_dir)
            .ok_or_else(|| NnaError::MissingPath(PathBuf::from("<data dir: pass --data-dir or set NNA_DATA_DIR>")))?;
        let sub = root.join(self.dataset.default_dir());
        Ok(if sub.is_dir() { sub } else { root.to_path_buf() })
    }

    /// Load the dataset and split off the validation holdout.
    pub fn load_data(&self, dir: &Path) -> Result<DatasetSplit> {
        let split = dataio::load_dataset(self.dataset, dir)?;
        self.prepare(split)
    }

    /// Apply the holdout to an already loaded dataset.
    pub fn prepare(&self, split: DatasetSplit) -> Result<DatasetSplit> {
        if self.holdout > 0 {
            split.with_validation(self.holdout, self.holdout_seed)
        } else {
            Ok(split)
        }
    }

    pub fn run_seed(&self, repetition: usize) -> u64 {
        rng::mix(self.seed, repetition as u64)
    }

    /// Build the encoder, learner and curriculum of one repetition.
    pub fn build(&self, split: &DatasetSplit, repetition: usize) -> Result<(Encoder, Learner, dataio::Curriculum)> {
        let seed = self.run_seed(repetition);
        let mut enc = self.encoder.clone();
        if enc.input_dim == 0 {
            enc.input_dim = split.input_dim;
        } else if enc.input_dim != split.input_dim {
            return Err(NnaError::DimensionMismatch {
                expected: split.input_dim,
                actual: enc.input_dim,
            });
        }
        enc.weight_seed = rng::mix(seed, 1);
        let encoder = Encoder::build(enc)?;
        let mut rule = self.rule.clone();
        rule.init_seed = rng::mix(seed, 2);
        let learner = Learner::new(rule, split.class_count, encoder.output_dim())?;
        let curriculum = build_curriculum(
            split,
            self.scenario,
            &self.partition(split.class_count),
            self.epochs,
            rng::mix(seed, 3),
        )?
        .with_sampling(self.sampling);
        Ok((encoder, learner, curriculum))
    }

    pub fn eval_set<'s>(&self, split: &'s DatasetSplit) -> &'s [dataio::Sample] {
        match self.evaluate_on {
            EvalSplit::Test => &split.test,
            EvalSplit::Validation => &split.validation,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            trace_every: self.trace_every,
            eval_each_episode: true,
        }
    }

    /// Run repetition `repetition` to completion.
    pub fn run_once(&self, split: &DatasetSplit, repetition: usize) -> Result<(RunRecord, Learner)> {
        let start = Instant::now();
        let (encoder, learner, curriculum) = self.build(split, repetition)?;
        let (result, learner): (RunResult, Learner) = run_curriculum(
            encoder,
            learner,
            curriculum,
            &split.train,
            self.eval_set(split),
            self.run_options(),
        )?;
        Ok((
            RunRecord {
                repetition,
                seed: self.run_seed(repetition),
                wall_seconds: start.elapsed().as_secs_f64(),
                result,
            },
            learner,
        ))
    }

    /// Run every repetition, `jobs` at a time. Returns the report and the
    /// trained learner of each repetition.
    pub fn run_all(&self, split: &DatasetSplit, jobs: usize) -> Result<(RunReport, Vec<Learner>)> {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| NnaError::InvalidConfig(e.to_string()))?;
        let runs = pool.install(|| {
            (0..self.repetitions)
                .into_par_iter()
                .map(|r| self.run_once(split, r))
                .collect::<Result<Vec<_>>>()
        })?;
        let (records, learners) = runs.into_iter().unzip();
        Ok((self.report(records), learners))
    }

    pub fn report(&self, runs: Vec<RunRecord>) -> RunReport {
        let echo = serde_json::to_value(self).expect("config serialises");
        RunReport::new(self.hash(), self.seed, echo, runs)
    }
}
