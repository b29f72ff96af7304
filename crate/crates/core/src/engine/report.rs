use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RunResult;
use crate::error::{NnaError, Result};

/// One repetition of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repetition: usize,
    pub seed: u64,
    pub wall_seconds: f64,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl RunSummary {
    pub fn from_accuracies(final_accuracies: Vec<f64>) -> Self {
        let n = final_accuracies.len();
        let mean = if n == 0 {
            0.0
        } else {
            final_accuracies.iter().sum::<f64>() / n as f64
        };
        let std = if n < 2 {
            0.0
        } else {
            (final_accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        RunSummary {
            final_accuracies,
            mean,
            std,
        }
    }
}

/// All repetitions of one experiment plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub summary: RunSummary,
    pub runs: Vec<RunRecord>,
}

impl RunReport {
    pub fn new(config_hash: String, seed: u64, config: serde_json::Value, runs: Vec<RunRecord>) -> Self {
        let summary = RunSummary::from_accuracies(runs.iter().map(|r| r.result.final_accuracy).collect());
        RunReport {
            config_hash,
            seed,
            config,
            summary,
            runs,
        }
    }

    fn stamp(&self) -> String {
        format!("# config_hash={} seed={}\n", self.config_hash, self.seed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| NnaError::Serialization(e.to_string()))
    }

    /// `repetition,seed,episode,task,accuracy` rows of every accuracy matrix.
    pub fn matrix_csv(&self) -> String {
        let mut s = self.stamp();
        s.push_str("repetition,seed,episode,task,accuracy\n");
        for r in &self.runs {
            for (i, row) in r.result.accuracy_matrix.iter().enumerate() {
                for (j, a) in row.iter().enumerate() {
                    let _ = writeln!(s, "{},{},{i},{j},{a}", r.repetition, r.seed);
                }
            }
        }
        s
    }

    /// Per-episode headline numbers plus the final accuracy summary.
    pub fn summary_csv(&self) -> String {
        let mut s = self.stamp();
        s.push_str("repetition,seed,episode,online_accuracy,avg_accuracy,avg_forgetting,union_accuracy\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.runs {
            let res = &r.result;
            for i in 0..res.online_accuracy.len() {
                let _ = writeln!(
                    s,
                    "{},{},{i},{},{},{},{}",
                    r.repetition,
                    r.seed,
                    res.online_accuracy[i],
                    opt(res.avg_accuracy_per_task.get(i).copied().flatten()),
                    opt(res.avg_forgetting_per_task.get(i).copied().flatten()),
                    opt(res.union_accuracy.get(i).copied().flatten()),
                );
            }
        }
        s.push_str("\nrepetition,seed,final_accuracy\n");
        for r in &self.runs {
            let _ = writeln!(s, "{},{},{}", r.repetition, r.seed, r.result.final_accuracy);
        }
        let _ = writeln!(s, "mean,,{}\nstd,,{}", self.summary.mean, self.summary.std);
        s
    }

    /// `repetition,sample,episode,online_accuracy,w0,w1,...`.
    pub fn traces_csv(&self) -> String {
        let mut s = self.stamp();
        let width = self
            .runs
            .iter()
            .flat_map(|r| r.result.weight_traces.first())
            .map(|t| t.weights.len())
            .next()
            .unwrap_or(0);
        s.push_str("repetition,sample,episode,online_accuracy");
        for k in 0..width {
            let _ = write!(s, ",w{k}");
        }
        s.push('\n');
        for r in &self.runs {
            for t in &r.result.weight_traces {
                let _ = write!(s, "{},{},{},{}", r.repetition, t.sample, t.episode, t.online_accuracy);
                for w in &t.weights {
                    let _ = write!(s, ",{w}");
                }
                s.push('\n');
            }
        }
        s
    }

    /// Write `<stem>.json`, `<stem>_matrix.csv`, `<stem>_summary.csv` and
    /// `<stem>_traces.csv` into `dir`.
    pub fn write_to(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| NnaError::io(dir, e))?;
        let put = |name: String, body: String| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| NnaError::io(&p, e))
        };
        put(format!("{stem}.json"), self.to_json()?)?;
        put(format!("{stem}_matrix.csv"), self.matrix_csv())?;
        put(format!("{stem}_summary.csv"), self.summary_csv())?;
        put(format!("{stem}_traces.csv"), self.traces_csv())
    }
}
