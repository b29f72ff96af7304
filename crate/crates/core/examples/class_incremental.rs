//! Split-MNIST, class-incremental: one shared head, no task identity at test
//! time. Compares the delta rule with the inelastic rule and prints the
//! average forgetting after each task.
//!
//! ```text
//! cargo run --release --example class_incremental -- data/
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

    let mut cfg = ExperimentConfig::new(DatasetKind::Mnist, Scenario::ClassIncremental, RuleConfig::default());
    cfg.encoder.cutoff = 2.0;
    cfg.trace_every = 0;
    let split = cfg.load_data(&cfg.resolve_data_dir(Some(&root), None)?)?;

    for (rule, beta1) in [(Rule::Mse, 0.0), (Rule::Inel, 100.0)] {
        cfg.rule = RuleConfig {
            rule,
            beta1,
            lr0: 2e-3,
            ..RuleConfig::default()
        };
        let (record, _) = cfg.run_once(&split, 0)?;
        let r = &record.result;
        let forgetting: Vec<String> = r
            .avg_forgetting_per_task
            .iter()
            .flatten()
            .map(|f| format!("{f:.3}"))
            .collect();
        println!(
            "{:<4} union accuracy {:.2}%  forgetting by task [{}]",
            rule.name(),
            100.0 * r.final_accuracy,
            forgetting.join(", ")
        );
    }
    Ok(())
}
