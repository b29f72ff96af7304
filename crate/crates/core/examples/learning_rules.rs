//! The four plasticity rules on a synthetic stream. Needs no dataset.
//!
//! ```text
//! cargo run --release --example learning_rules
//! ```

use nna::dataio::synthetic::blob_split;
use nna::dataio::{build_curriculum, Scenario};
use nna::encoder::{Encoder, EncoderConfig};
use nna::engine::{run_curriculum, RunOptions};
use nna::plasticity::{ClampMode, Learner, Rule, RuleConfig};

fn main() -> nna::Result<()> {
    let classes = 5;
    let split = blob_split(classes, 400, 100, 32, 0.2, 7)?;
    let everything = vec![(0..classes).collect::<Vec<_>>()];

    for (rule, beta1, lr0) in [
        (Rule::Gen, 0.05, 1e-3),
        (Rule::Oja, 1.0, 1e-3),
        (Rule::Mse, 0.0, 1e-2),
        (Rule::Inel, 50.0, 1e-2),
    ] {
        let encoder = Encoder::build(EncoderConfig {
            input_dim: 32,
            expansion_dim: 1000,
            cutoff: 1.0,
            density: 0.1,
            weight_seed: 1,
            threshold_enabled: true,
            bypass: false,
        })?;
        let learner = Learner::new(
            RuleConfig {
                rule,
                beta1,
                lr0,
                clamp_mode: ClampMode::Symmetric,
                // a zero start gives zero output, which the Hebbian rules never leave
                init_scale: 0.01,
                init_seed: 5,
                ..RuleConfig::default()
            },
            classes,
            encoder.output_dim(),
        )?;
        let curriculum = build_curriculum(&split, Scenario::SingleTask, &everything, 1.0, 3)?;
        let (result, learner) = run_curriculum(encoder, learner, curriculum, &split.train, &split.test, RunOptions::default())?;
        let trace: Vec<String> = learner.weight_trace().iter().map(|w| format!("{w:+.4}")).collect();
        println!(
            "{:<4} test {:.1}%  online {:.1}%  mean weight per output [{}]",
            rule.name(),
            100.0 * result.final_accuracy,
            100.0 * result.online_accuracy[0],
            trace.join(" ")
        );
    }
    Ok(())
}
