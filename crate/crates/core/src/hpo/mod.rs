//! Configuration search: seeded random sampling of a mixed space, scored on
//! a validation holdout, with successive-halving pruning.

mod search;
mod space;

pub use search::{run_search, trial_config, SearchOptions, SearchResult, TrialRecord};
pub use space::{sample_config, ConfigSpace, Range, RuleAxes, SampledConfig, DEFAULT_SPACE_TOML};
