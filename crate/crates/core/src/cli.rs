//! The `nna` command line.
//!
//! ```text
//! nna train            --config exp.toml [--data-dir DIR] [--seed N] [--jobs N] [--out DIR]
//! nna eval             --config exp.toml --checkpoint learner_0.nnac [--repetition R]
//! nna search           --config base.toml [--space space.toml] [--budget N] [--rules MSE,INEL]
//! nna transfer-metrics --datasets mnist,fashion-mnist
//! nna ablate           --config exp.toml [--toggles no_threshold,bypass_encoder]
//! ```
//!
//! The data directory comes from `--data-dir`, then the config's `data_dir`,
//! then `NNA_DATA_DIR`. Exit codes: 0 success, 1 runtime failure, 2 usage or
//! configuration error (including a missing data path).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::dataio::{self, DatasetKind, Scenario};
use crate::engine::{evaluate, RunReport};
use crate::error::{NnaError, Result};
use crate::hpo::{run_search, ConfigSpace, SearchOptions};
use crate::plasticity::{read_checkpoint, write_checkpoint, Rule};
use crate::transfer;

pub const DATA_ENV: &str = "NNA_DATA_DIR";

#[derive(Debug, Parser)]
#[command(name = "nna", version, about = "Online continual learning with neuromodulated local plasticity")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Data root or dataset directory; falls back to the config, then NNA_DATA_DIR.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Override the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured experiment `repetitions` times.
    Train,
    /// Score a saved learner checkpoint on the test split.
    Eval(EvalArgs),
    /// Search the configuration space on a validation holdout.
    Search(SearchArgs),
    /// Eigen dimension, centroid cosine distances and transfer coefficients.
    TransferMetrics(TransferArgs),
    /// Compare the full model with encoder ablations.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Repetition whose encoder the checkpoint was trained with.
    #[arg(long, default_value_t = 0)]
    pub repetition: usize,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Search space (TOML); the bundled default when omitted.
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    /// Restrict the rule axis, e.g. `MSE,INEL`.
    #[arg(long, value_delimiter = ',')]
    pub rules: Vec<String>,
    /// Validation holdout used when the config has none.
    #[arg(long, default_value_t = 10_000)]
    pub holdout: usize,
    #[arg(long, default_value_t = 16)]
    pub bracket: usize,
    /// Disable successive-halving pruning.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Comma-separated dataset names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub datasets: Vec<String>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Any of `no_threshold`, `bypass_encoder`.
    #[arg(long, value_delimiter = ',', default_value = "no_threshold,bypass_encoder")]
    pub toggles: Vec<String>,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train => cmd_train(&cli.common),
        Command::Eval(a) => cmd_eval(&cli.common, a),
        Command::Search(a) => cmd_search(&cli.common, a),
        Command::TransferMetrics(a) => cmd_transfer_metrics(&cli.common, a),
        Command::Ablate(a) => cmd_ablate(&cli.common, a),
    }
}

fn env_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn jobs(c: &Common) -> usize {
    c.jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let path = c
        .config
        .as_deref()
        .ok_or_else(|| NnaError::InvalidConfig("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(c: &Common, cfg: Option<&ExperimentConfig>, fallback: &str) -> PathBuf {
    c.out
        .clone()
        .or_else(|| cfg.and_then(|k| k.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn write(path: &Path, body: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| NnaError::io(parent, e))?;
    }
    std::fs::write(path, body).map_err(|e| NnaError::io(path, e))
}

fn data_for(c: &Common, cfg: &ExperimentConfig) -> Result<dataio::DatasetSplit> {
    let dir = cfg.resolve_data_dir(c.data_dir.as_deref(), env_dir().as_deref())?;
    cfg.load_data(&dir)
}

/// Run all repetitions; write the report files and one checkpoint per
/// repetition into the output directory.
pub fn cmd_train(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let split = data_for(c, &cfg)?;
    let (report, learners) = cfg.run_all(&split, jobs(c))?;
    let out = out_dir(c, Some(&cfg), "nna-out");
    report.write_to(&out, "report")?;
    for (r, l) in learners.iter().enumerate() {
        write_checkpoint(&out.join(format!("learner_{r}.nnac")), l)?;
    }
    print_summary(&report);
    Ok(())
}

fn print_summary(report: &RunReport) {
    for r in &report.runs {
        println!(
            "repetition {} seed {}: final accuracy {:.4} ({:.1}s)",
            r.repetition, r.seed, r.result.final_accuracy, r.wall_seconds
        );
    }
    println!(
        "mean {:.4} std {:.4} over {} run(s)  [config {}]",
        report.summary.mean,
        report.summary.std,
        report.runs.len(),
        report.config_hash
    );
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_hash: String,
    pub seed: u64,
    pub checkpoint: PathBuf,
    /// Accuracy on each task's test samples under the scenario's head rule.
    pub per_task: Vec<f64>,
    /// Accuracy on all curriculum test samples with every output allowed.
    pub union: f64,
}

pub fn cmd_eval(c: &Common, a: &EvalArgs) -> Result<()> {
    let cfg = load_config(c)?;
    let split = data_for(c, &cfg)?;
    let learner = read_checkpoint(&a.checkpoint)?;
    let (encoder, _, curriculum) = cfg.build(&split, a.repetition)?;
    if learner.inputs() != encoder.output_dim() || learner.outputs() != split.class_count {
        return Err(NnaError::DimensionMismatch {
            expected: encoder.output_dim(),
            actual: learner.inputs(),
        });
    }
    let test = cfg.eval_set(&split);
    let mut per_task = Vec::new();
    for t in &curriculum.tasks {
        let samples: Vec<_> = test.iter().filter(|s| t.classes.contains(&s.label)).collect();
        let allowed = (curriculum.scenario == Scenario::TaskIncremental).then_some(t.classes.as_slice());
        per_task.push(evaluate(&encoder, &learner, samples, allowed)?);
    }
    let classes = curriculum.all_classes();
    let union = evaluate(
        &encoder,
        &learner,
        test.iter().filter(|s| classes.contains(&s.label)),
        None,
    )?;
    let report = EvalReport {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        checkpoint: a.checkpoint.clone(),
        per_task,
        union,
    };
    let out = out_dir(c, Some(&cfg), "nna-out");
    write(
        &out.join("eval.json"),
        serde_json::to_string_pretty(&report).map_err(|e| NnaError::Serialization(e.to_string()))?,
    )?;
    for (i, acc) in report.per_task.iter().enumerate() {
        println!("task {i}: {acc:.4}");
    }
    println!("union: {:.4}  [config {}]", report.union, report.config_hash);
    Ok(())
}

pub fn cmd_search(c: &Common, a: &SearchArgs) -> Result<()> {
    let mut base = load_config(c)?;
    if base.holdout == 0 {
        base.holdout = a.holdout;
    }
    let mut space = match &a.space {
        Some(p) => ConfigSpace::load(p)?,
        None => ConfigSpace::default(),
    };
    if !a.rules.is_empty() {
        space.rules = a
            .rules
            .iter()
            .map(|r| parse_rule(r))
            .collect::<Result<Vec<_>>>()?;
    }
    let split = data_for(c, &base)?;
    let mut options = SearchOptions {
        budget: a.budget,
        seed: base.seed,
        jobs: jobs(c),
        bracket: a.bracket,
        ..SearchOptions::default()
    };
    if a.no_prune {
        options.rungs.clear();
    }
    let result = run_search(&base, &space, &split, &options)?;
    let out = out_dir(c, Some(&base), "nna-search");
    result.write_to(&out)?;
    match result.best() {
        Some(b) => println!(
            "best trial {} ({}): validation accuracy {:.4}; config in {}",
            b.trial_index,
            b.config.rule.rule.name(),
            b.accuracy,
            out.join("best.toml").display()
        ),
        None => println!("no trial completed"),
    }
    Ok(())
}

fn parse_rule(s: &str) -> Result<Rule> {
    Rule::ALL
        .into_iter()
        .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
        .ok_or_else(|| NnaError::InvalidConfig(format!("unknown rule {s:?}")))
}

pub fn cmd_transfer_metrics(c: &Common, a: &TransferArgs) -> Result<()> {
    let root = c
        .data_dir
        .clone()
        .or_else(env_dir)
        .ok_or_else(|| NnaError::MissingPath(PathBuf::from("<data dir: pass --data-dir or set NNA_DATA_DIR>")))?;
    let mut loaded = Vec::new();
    for name in &a.datasets {
        let kind = DatasetKind::parse(name)
            .ok_or_else(|| NnaError::InvalidConfig(format!("unknown dataset {name:?}")))?;
        let sub = root.join(kind.default_dir());
        let dir = if sub.is_dir() { sub } else { root.clone() };
        loaded.push((kind.name().to_string(), dataio::load_dataset(kind, &dir)?.train));
    }
    let mut eigen = Vec::new();
    for (name, train) in &loaded {
        eigen.push((name.clone(), transfer::eigen_dimension(train)?));
    }
    let mut cosine = Vec::new();
    for (i, (na, a)) in loaded.iter().enumerate() {
        for (nb, b) in &loaded[i..] {
            let d = if na == nb {
                transfer::self_cosine_distance_matrix(a)?
            } else {
                transfer::cosine_distance_matrix(a, b)?
            };
            cosine.push((na.clone(), nb.clone(), d));
        }
    }
    let out = out_dir(c, None, "nna-transfer");
    write(&out.join("eigen_dimension.csv"), transfer::eigen_table_csv(&eigen))?;
    write(&out.join("cosine_distance.csv"), transfer::cosine_table_csv(&cosine))?;
    let metrics: Vec<(String, f64)> = eigen.iter().map(|(n, e)| (n.clone(), e.value)).collect();
    write(&out.join("transfer_coefficient.csv"), transfer::transfer_table_csv(&metrics)?)?;
    for (n, e) in &eigen {
        println!("{n}: eigen dimension {:.2}{}", e.value, if e.degenerate { " (degenerate)" } else { "" });
    }
    for (x, y, d) in &cosine {
        println!("{x} / {y}: cosine distance min {:.4} max {:.4}", d.min, d.max);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Toggle {
    NoThreshold,
    BypassEncoder,
}

impl Toggle {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "no_threshold" => Ok(Toggle::NoThreshold),
            "bypass_encoder" => Ok(Toggle::BypassEncoder),
            other => Err(NnaError::InvalidConfig(format!("unknown ablation toggle {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Toggle::NoThreshold => "no_threshold",
            Toggle::BypassEncoder => "bypass_encoder",
        }
    }

    pub fn apply(self, cfg: &mut ExperimentConfig) {
        match self {
            Toggle::NoThreshold => cfg.encoder.threshold_enabled = false,
            Toggle::BypassEncoder => cfg.encoder.bypass = true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub mean: f64,
    pub std: f64,
    pub delta: f64,
    pub report: RunReport,
}

/// Baseline plus one run set per toggle, all with the config's seeds.
pub fn ablate(cfg: &ExperimentConfig, split: &dataio::DatasetSplit, toggles: &[Toggle], jobs: usize) -> Result<Vec<AblationRow>> {
    let (base, _) = cfg.run_all(split, jobs)?;
    let mut rows = vec![AblationRow {
        variant: "baseline".into(),
        mean: base.summary.mean,
        std: base.summary.std,
        delta: 0.0,
        report: base.clone(),
    }];
    for &t in toggles {
        let mut v = cfg.clone();
        t.apply(&mut v);
        let (r, _) = v.run_all(split, jobs)?;
        rows.push(AblationRow {
            variant: t.name().into(),
            mean: r.summary.mean,
            std: r.summary.std,
            delta: r.summary.mean - base.summary.mean,
            report: r,
        });
    }
    Ok(rows)
}

pub fn ablation_csv(cfg: &ExperimentConfig, rows: &[AblationRow]) -> String {
    let mut s = format!("# config_hash={} seed={}\nvariant,mean,std,delta\n", cfg.hash(), cfg.seed);
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.variant, r.mean, r.std, r.delta);
    }
    s
}

pub fn cmd_ablate(c: &Common, a: &AblateArgs) -> Result<()> {
    let cfg = load_config(c)?;
    let toggles = a
        .toggles
        .iter()
        .filter(|t| !t.trim().is_empty())
        .map(|t| Toggle::parse(t))
        .collect::<Result<Vec<_>>>()?;
    let split = data_for(c, &cfg)?;
    let rows = ablate(&cfg, &split, &toggles, jobs(c))?;
    let out = out_dir(c, Some(&cfg), "nna-ablate");
    write(&out.join("ablation.csv"), ablation_csv(&cfg, &rows))?;
    write(
        &out.join("ablation.json"),
        serde_json::to_string_pretty(&rows).map_err(|e| NnaError::Serialization(e.to_string()))?,
    )?;
    for r in &rows {
        println!("{:<15} {:.4} ± {:.4}  (delta {:+.4})", r.variant, r.mean, r.std, r.delta);
    }
    Ok(())
}
