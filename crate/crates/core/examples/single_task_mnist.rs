//! Single-task MNIST with the delta (MSE) rule, one epoch.
//!
//! ```text
//! cargo run --release --example single_task_mnist -- data/
//! ```
//! The argument (or `NNA_DATA_DIR`) is the data root holding `mnist/`.

use std::path::PathBuf;

use nna::config::ExperimentConfig;
use nna::dataio::{DatasetKind, Scenario};
use nna::plasticity::{ClampMode, Rule, RuleConfig};

fn main() -> nna::Result<()> {
    let root = std::env::args_os()
        .nth(1)
        .or_else(|| std::env::var_os("NNA_DATA_DIR"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));

    let rule = RuleConfig {
        rule: Rule::Mse,
        lr0: 2e-3,
        clamp_mode: ClampMode::Symmetric,
        clamp_bound: 1.0,
        ..RuleConfig::default()
    };
    let mut cfg = ExperimentConfig::new(DatasetKind::Mnist, Scenario::SingleTask, rule);
    cfg.trace_every = 0;

    let split = cfg.load_data(&cfg.resolve_data_dir(Some(&root), None)?)?;
    let (record, _) = cfg.run_once(&split, 0)?;
    println!(
        "test accuracy {:.2}%  online {:.2}%  ({:.1}s)",
        100.0 * record.result.final_accuracy,
        100.0 * record.result.online_accuracy[0],
        record.wall_seconds
    );
    Ok(())
}
