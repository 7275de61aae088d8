//! Batch experiments: plans, seeded jobs, parallel execution, CSV output
//! and aggregation.

pub mod plan;
pub mod records;
pub mod runner;
pub mod stats;

pub use plan::{presets, CellKey, ExperimentPlan, GraphPolicy, Job};
pub use records::{aggregate, read_aggregate_csv, read_raw_csv, write_aggregate_csv, AggregateRow, RawRow, TraceRow};
pub use runner::{run_plan, Manifest, RunSummary, WORKERS_ENV};
pub use stats::{bootstrap_median_diff, summarize, BootstrapCi, Summary};
