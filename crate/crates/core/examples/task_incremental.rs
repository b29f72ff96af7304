//! Split-MNIST, task-incremental: five two-class tasks, each scored on its
//! own output head.
//!
//! ```text
//! cargo run --release --example task_incremental -- data/
//! ```

use std::path::PathBuf;

use nna::config::ExperimentConfig;
use nna::dataio::{DatasetKind, Scenario};
use nna::plasticity::{Rule, RuleConfig};

fn main() -> nna::Result<()> {
    let root = std::env::args_os()
        .nth(1)
        .or_else(|| std::env::var_os("NNA_DATA_DIR"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));

    let rule = RuleConfig {
        rule: Rule::Mse,
        lr0: 2e-3,
        ..RuleConfig::default()
    };
    let mut cfg = ExperimentConfig::new(DatasetKind::Mnist, Scenario::TaskIncremental, rule);
    cfg.encoder.cutoff = 2.0;
    cfg.trace_every = 0;

    let split = cfg.load_data(&cfg.resolve_data_dir(Some(&root), None)?)?;
    let (record, _) = cfg.run_once(&split, 0)?;
    let r = &record.result;
    for (i, row) in r.accuracy_matrix.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|a| format!("{:.3}", a)).collect();
        println!("after task {i}: [{}]", cells.join(", "));
    }
    println!("mean accuracy over tasks {:.2}%", 100.0 * r.final_accuracy);
    Ok(())
}
