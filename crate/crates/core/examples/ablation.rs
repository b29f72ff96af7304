//! Single-task MNIST with the dynamic threshold disabled and with the encoder
//! bypassed, next to the full model.
//!
//! ```text
//! cargo run --release --example ablation -- data/
//! ```

use std::path::PathBuf;

use nna::cli::{ablate, Toggle};
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
        rule: Rule::Inel,
        beta1: 100.0,
        lr0: 2e-3,
        ..RuleConfig::default()
    };
    let mut cfg = ExperimentConfig::new(DatasetKind::Mnist, Scenario::SingleTask, rule);
    cfg.encoder.cutoff = 2.0;
    cfg.trace_every = 0;
    let split = cfg.load_data(&cfg.resolve_data_dir(Some(&root), None)?)?;

    for row in ablate(&cfg, &split, &[Toggle::NoThreshold, Toggle::BypassEncoder], 1)? {
        println!("{:<15} {:.2}%  ({:+.2} points)", row.variant, 100.0 * row.mean, 100.0 * row.delta);
    }
    Ok(())
}
