//! Precomputed features through NNAF files: write a train and test file,
//! load them back as the `features` dataset and run Task-IL on them.
//!
//! ```text
//! cargo run --release --example feature_files -- /tmp/nnaf-demo
//! ```

use std::path::PathBuf;

use nna::config::ExperimentConfig;
use nna::dataio::synthetic::blob_split;
use nna::dataio::{load_feature_file, write_feature_file, DatasetKind, Scenario};
use nna::plasticity::{Rule, RuleConfig};

fn main() -> nna::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("nnaf-demo"));
    let features = dir.join("features");
    std::fs::create_dir_all(&features).map_err(|e| nna::NnaError::Io {
        path: features.clone(),
        source: e,
    })?;

    // stand-ins for exported backbone features
    let synthetic = blob_split(10, 200, 50, 64, 0.2, 1)?;
    write_feature_file(&features.join("train.nnaf"), &synthetic.train, 10)?;
    write_feature_file(&features.join("test.nnaf"), &synthetic.test, 10)?;
    let back = load_feature_file(&features.join("train.nnaf"))?;
    println!(
        "{}: {} samples, {} features, {} classes",
        features.join("train.nnaf").display(),
        back.samples.len(),
        back.feature_dim,
        back.class_count
    );

    let rule = RuleConfig {
        rule: Rule::Mse,
        lr0: 5e-3,
        ..RuleConfig::default()
    };
    let mut cfg = ExperimentConfig::new(DatasetKind::Features, Scenario::TaskIncremental, rule);
    cfg.encoder.expansion_dim = 2000;
    cfg.trace_every = 0;
    let split = cfg.load_data(&cfg.resolve_data_dir(Some(&dir), None)?)?;
    let (record, _) = cfg.run_once(&split, 0)?;
    println!("task-IL accuracy {:.2}%", 100.0 * record.result.final_accuracy);
    Ok(())
}
