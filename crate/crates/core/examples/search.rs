//! Random search with successive halving over the default space, on a
//! synthetic dataset so it finishes in seconds.
//!
//! ```text
//! cargo run --release --example search -- 40
//! ```
//! The argument is the trial budget.

use nna::config::ExperimentConfig;
use nna::dataio::synthetic::blob_split;
use nna::dataio::{DatasetKind, Scenario};
use nna::hpo::{run_search, ConfigSpace, Range, SearchOptions};
use nna::plasticity::RuleConfig;

fn main() -> nna::Result<()> {
    let budget = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(40);
    let split = blob_split(6, 300, 60, 24, 0.25, 11)?.with_validation(300, 0)?;

    let mut base = ExperimentConfig::new(DatasetKind::Features, Scenario::SingleTask, RuleConfig::default());
    base.holdout = 300;
    base.seed = 1;
    let mut space = ConfigSpace::default();
    space.expansion_dim = Range::linear(200.0, 1500.0);

    let options = SearchOptions {
        budget,
        seed: base.seed,
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        probe: 200,
        ..SearchOptions::default()
    };
    let result = run_search(&base, &space, &split, &options)?;
    let best = result.best_so_far();
    for (t, b) in result.trials.iter().zip(&best) {
        let pruned = t.pruned_at.map_or(String::new(), |r| format!(" (pruned at rung {r})"));
        println!(
            "trial {:>3} {:<4} {:.3}{pruned}  best so far {:.3}",
            t.trial_index,
            t.config.rule.rule.name(),
            t.accuracy,
            b.unwrap_or(0.0)
        );
    }
    if let Some(b) = result.best() {
        println!("\nbest config:\n{}", b.config.to_toml_string()?);
    }
    Ok(())
}
