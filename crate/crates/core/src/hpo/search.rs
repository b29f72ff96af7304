use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::{sample_config, ConfigSpace};
use crate::config::{EvalSplit, ExperimentConfig};
use crate::dataio::{DatasetSplit, Scenario};
use crate::engine::{RunOptions, ScenarioRunner};
use crate::error::{NnaError, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub budget: usize,
    pub seed: u64,
    pub jobs: usize,
    /// Trials started together; pruning compares trials within a bracket.
    pub bracket: usize,
    /// Stream fractions at which the bottom half of a bracket is pruned.
    /// Empty disables pruning.
    pub rungs: Vec<f64>,
    /// Evaluation samples used for a class-incremental rung score.
    pub probe: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: 200,
            seed: 0,
            jobs: 1,
            bracket: 16,
            rungs: vec![0.25, 0.5],
            probe: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub scenario: Scenario,
    /// Complete, directly runnable configuration of the trial.
    pub config: ExperimentConfig,
    /// Validation accuracy when completed, rung score when pruned.
    pub accuracy: f64,
    /// Index of the rung at which the trial was stopped.
    pub pruned_at: Option<usize>,
    /// Fraction of the curriculum streamed.
    pub progress: f64,
    /// Compute time spent on this trial.
    pub wall_seconds: f64,
    /// Seconds since the search started when the record was closed.
    pub elapsed_seconds: f64,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn completed(&self) -> bool {
        self.pruned_at.is_none() && self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Every trial, ordered by `trial_index`.
    pub trials: Vec<TrialRecord>,
}

impl SearchResult {
    /// The completed trial with the highest accuracy (lowest index on ties).
    pub fn best(&self) -> Option<&TrialRecord> {
        self.trials.iter().filter(|t| t.completed()).fold(None, |best: Option<&TrialRecord>, t| match best {
            Some(b) if b.accuracy >= t.accuracy => Some(b),
            _ => Some(t),
        })
    }

    /// Best completed accuracy among trials `0..=i`, for every `i`.
    pub fn best_so_far(&self) -> Vec<Option<f64>> {
        let mut best: Option<f64> = None;
        self.trials
            .iter()
            .map(|t| {
                if t.completed() {
                    best = Some(best.map_or(t.accuracy, |b| b.max(t.accuracy)));
                }
                best
            })
            .collect()
    }

    /// Deterministic trajectory table: identical inputs give identical bytes.
    pub fn trajectory_csv(&self) -> String {
        let mut s = String::from(
            "trial_index,seed,scenario,rule,expansion_dim,cutoff,density,beta1,beta2,beta3,lr0,\
             clamp_mode,clamp_bound,filtered_mse,inel_mu_scope,init_scale,status,progress,val_accuracy,best_so_far\n",
        );
        for (t, best) in self.trials.iter().zip(self.best_so_far()) {
            let (e, r) = (&t.config.encoder, &t.config.rule);
            let status = match (&t.error, t.pruned_at) {
                (Some(_), _) => "failed".to_string(),
                (None, Some(k)) => format!("pruned@{k}"),
                (None, None) => "completed".to_string(),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                t.trial_index,
                t.seed,
                t.scenario.tag(),
                r.rule.name(),
                e.expansion_dim,
                e.cutoff,
                e.density,
                r.beta1,
                r.beta2,
                r.beta3,
                r.lr0,
                serde_json::to_value(r.clamp_mode).unwrap().as_str().unwrap_or(""),
                r.clamp_bound,
                r.filtered_mse,
                serde_json::to_value(r.inel_mu_scope).unwrap().as_str().unwrap_or(""),
                r.init_scale,
                status,
                t.progress,
                t.accuracy,
                best.map(|b| b.to_string()).unwrap_or_default(),
            );
        }
        s
    }

    /// Wall-clock columns, kept apart so the trajectory stays reproducible.
    pub fn timing_csv(&self) -> String {
        let mut s = String::from("trial_index,wall_seconds,elapsed_seconds,val_accuracy\n");
        for t in &self.trials {
            let _ = writeln!(s, "{},{},{},{}", t.trial_index, t.wall_seconds, t.elapsed_seconds, t.accuracy);
        }
        s
    }

    /// Write `trajectory.csv`, `timing.csv`, `trials.json` and, when any
    /// trial completed, `best.toml`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| NnaError::io(dir, e))?;
        let put = |name: &str, body: String| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| NnaError::io(&p, e))
        };
        put("trajectory.csv", self.trajectory_csv())?;
        put("timing.csv", self.timing_csv())?;
        put(
            "trials.json",
            serde_json::to_string_pretty(self).map_err(|e| NnaError::Serialization(e.to_string()))?,
        )?;
        if let Some(best) = self.best() {
            let stamp = format!(
                "# best of search: trial {} validation accuracy {} config_hash={}\n",
                best.trial_index,
                best.accuracy,
                best.config.hash()
            );
            put("best.toml", stamp + &best.config.to_toml_string()?)?;
        }
        Ok(())
    }
}

/// The runnable config of trial `index`: `base` with the sampled encoder and
/// rule settings, its own seed, one repetition, scored on validation.
pub fn trial_config(base: &ExperimentConfig, space: &ConfigSpace, search_seed: u64, index: usize) -> ExperimentConfig {
    let point = sample_config(space, search_seed, index);
    let mut cfg = base.clone();
    cfg.encoder = point.encoder;
    cfg.encoder.input_dim = base.encoder.input_dim;
    cfg.rule = point.rule;
    cfg.seed = rng::mix(search_seed, 0x7a1a_0000 + index as u64);
    cfg.repetitions = 1;
    cfg.evaluate_on = EvalSplit::Validation;
    cfg.trace_every = 0;
    cfg
}

struct Live<'a> {
    index: usize,
    config: ExperimentConfig,
    runner: ScenarioRunner<'a>,
    spent: f64,
}

/// Random search with synchronous successive halving.
///
/// `split` must carry a validation partition; every trial trains on
/// `split.train` and is scored on `split.validation`. Trials are grouped in
/// brackets of `options.bracket`; at each rung the lower half of the still
/// running trials (by rung score, ties to the lower index) is stopped. The
/// set of records depends only on the inputs, not on `jobs`.
pub fn run_search(
    base: &ExperimentConfig,
    space: &ConfigSpace,
    split: &DatasetSplit,
    options: &SearchOptions,
) -> Result<SearchResult> {
    if options.budget == 0 {
        return Err(NnaError::InvalidConfig("search budget must be >= 1".into()));
    }
    if split.validation.is_empty() {
        return Err(NnaError::InvalidConfig("search needs a validation holdout (holdout > 0)".into()));
    }
    space.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| NnaError::InvalidConfig(e.to_string()))?;
    let start = Instant::now();
    let mut rungs: Vec<f64> = options.rungs.iter().copied().filter(|f| *f > 0.0 && *f < 1.0).collect();
    rungs.sort_by(f64::total_cmp);

    let mut records = Vec::with_capacity(options.budget);
    let bracket = options.bracket.max(1);
    let mut first = 0;
    while first < options.budget {
        let last = (first + bracket).min(options.budget);
        pool.install(|| run_bracket(base, space, split, options, &rungs, first..last, start, &mut records))?;
        first = last;
    }
    records.sort_by_key(|r| r.trial_index);
    Ok(SearchResult { trials: records })
}

#[allow(clippy::too_many_arguments)]
fn run_bracket<'a>(
    base: &ExperimentConfig,
    space: &ConfigSpace,
    split: &'a DatasetSplit,
    options: &SearchOptions,
    rungs: &[f64],
    trials: std::ops::Range<usize>,
    start: Instant,
    records: &mut Vec<TrialRecord>,
) -> Result<()> {
    let failed = |index: usize, config: ExperimentConfig, e: NnaError, spent: f64| TrialRecord {
        trial_index: index,
        seed: config.seed,
        scenario: config.scenario,
        config,
        accuracy: 0.0,
        pruned_at: None,
        progress: 0.0,
        wall_seconds: spent,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        error: Some(e.to_string()),
    };

    let built: Vec<std::result::Result<Live<'a>, TrialRecord>> = trials
        .into_par_iter()
        .map(|index| {
            let t0 = Instant::now();
            let config = trial_config(base, space, options.seed, index);
            let opts = RunOptions {
                trace_every: 0,
                eval_each_episode: false,
            };
            match config
                .build(split, 0)
                .and_then(|(e, l, c)| ScenarioRunner::new(e, l, c, &split.train, &split.validation, opts))
            {
                Ok(runner) => Ok(Live {
                    index,
                    config,
                    runner,
                    spent: t0.elapsed().as_secs_f64(),
                }),
                Err(e) => Err(failed(index, config, e, t0.elapsed().as_secs_f64())),
            }
        })
        .collect();
    let mut live = Vec::new();
    for b in built {
        match b {
            Ok(l) => live.push(l),
            Err(r) => records.push(r),
        }
    }

    for (k, &frac) in rungs.iter().enumerate() {
        if live.len() < 2 {
            break;
        }
        let scored: Vec<std::result::Result<f64, NnaError>> = live
            .par_iter_mut()
            .map(|l| {
                let t0 = Instant::now();
                let target = (frac * l.runner.curriculum().total_iterations() as f64).floor() as usize;
                let todo = target.saturating_sub(l.runner.samples_seen());
                let out = l.runner.advance(todo).and_then(|_| l.runner.partial_score(options.probe));
                l.spent += t0.elapsed().as_secs_f64();
                out
            })
            .collect();
        let mut ranked: Vec<(usize, f64)> = Vec::with_capacity(live.len());
        let mut keep_failed = Vec::new();
        for (pos, s) in scored.into_iter().enumerate() {
            match s {
                Ok(v) => ranked.push((pos, if v.is_nan() { -1.0 } else { v })),
                Err(e) => keep_failed.push((pos, e)),
            }
        }
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(live[a.0].index.cmp(&live[b.0].index)));
        let survivors = ranked.len().div_ceil(2);
        let mut drop: Vec<(usize, Option<f64>, Option<NnaError>)> =
            ranked[survivors..].iter().map(|&(p, v)| (p, Some(v), None)).collect();
        drop.extend(keep_failed.into_iter().map(|(p, e)| (p, None, Some(e))));
        drop.sort_by_key(|d| std::cmp::Reverse(d.0));
        for (pos, score, err) in drop {
            let l = live.remove(pos);
            let rec = match err {
                Some(e) => failed(l.index, l.config, e, l.spent),
                None => TrialRecord {
                    trial_index: l.index,
                    seed: l.config.seed,
                    scenario: l.config.scenario,
                    progress: l.runner.progress(),
                    config: l.config,
                    accuracy: score.unwrap_or(0.0).max(0.0),
                    pruned_at: Some(k),
                    wall_seconds: l.spent,
                    elapsed_seconds: start.elapsed().as_secs_f64(),
                    error: None,
                },
            };
            records.push(rec);
        }
    }

    let done: Vec<TrialRecord> = live
        .into_par_iter()
        .map(|l| {
            let t0 = Instant::now();
            let Live {
                index,
                config,
                runner,
                spent,
            } = l;
            match runner.run_to_end() {
                Ok((res, _)) => TrialRecord {
                    trial_index: index,
                    seed: config.seed,
                    scenario: config.scenario,
                    config,
                    accuracy: res.final_accuracy,
                    pruned_at: None,
                    progress: 1.0,
                    wall_seconds: spent + t0.elapsed().as_secs_f64(),
                    elapsed_seconds: start.elapsed().as_secs_f64(),
                    error: None,
                },
                Err(e) => failed(index, config, e, spent + t0.elapsed().as_secs_f64()),
            }
        })
        .collect();
    records.extend(done);
    Ok(())
}
