//! Process-conformance rewards for sequence policies.
//!
//! This crate turns free-form reasoning text into event-log traces, mines
//! process models from those traces, measures how well a model agrees with a
//! teacher demonstration, and feeds the resulting score into a small
//! group-relative policy trainer. The pieces compose into a pipeline:
//!
//! 1. [`extract`] segments text into activity traces ([`eventlog`]).
//! 2. [`discovery`] mines a process tree per trace and compiles it to a
//!    workflow Petri net.
//! 3. [`conformance`] aligns the teacher trace against the net and scores
//!    fitness, precision, and their harmonic mean.
//! 4. [`reward`] combines format, answer, and conformance terms.
//! 5. [`gspo`] optimizes a toy n-gram policy with group-relative,
//!    sequence-level clipped updates driven by those rewards.
//!
//! The [`cli`] module exposes the pipeline as subcommands, configured by
//! [`config`] from TOML files layered with `THIP_*` environment overrides;
//! the `examples/` directory shows each capability as a small runnable
//! program.

pub mod cli;
pub mod conformance;
pub mod config;
pub mod discovery;
pub mod eventlog;
pub mod extract;
pub mod gspo;
pub mod reward;

pub use conformance::{align, conformance_check, f1_score, Alignment, ConformanceResult};
pub use discovery::{
    discover_net, discover_tree, tree_to_petri, Marking, PetriNet, ProcessTree,
};
pub use eventlog::{DirectlyFollowsGraph, EventLog, Trace};
pub use config::RunConfig;
pub use extract::{extract_trace, ExtractionRules};
pub use gspo::{train, GspoConfig, PolicyParams, SyntheticTask, TrainerReport};
pub use reward::{total_reward, Query, RewardBreakdown, RolloutText};
