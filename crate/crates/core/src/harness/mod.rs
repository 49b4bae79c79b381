//! Multi-agent experiments: configuration, seeded training runs, the
//! agent-filtering rules, aggregation and on-disk artifacts.

mod agent;
mod config;
mod output;
pub mod plot;
mod stats;

pub use agent::{
    run_agent, run_agent_with_progress, run_experiment, run_experiment_with_progress, AgentRecord, AgentStatus,
    EpisodeLog, ParamSnapshot, Progress,
};
pub use config::{ConfigOverrides, ExperimentConfig, DEFAULT_FILTER_EPISODE, DEFAULT_FILTER_THRESHOLD, DEFAULT_WINDOW};
pub use output::{
    agent_csv_name, agent_rows, emit_outputs, filter_rules, read_agent_csv, read_aggregate_csv, replay, run_and_emit,
    AgentCsvRow, AggregateCsvRow, Manifest, ManifestAgent, ReplayReport, RunOutcome, AGGREGATE_FILE, MANIFEST_FILE,
};
pub use stats::{aggregate, apply_filters, classify, moving_average, AggregateRow, FilterRules};
