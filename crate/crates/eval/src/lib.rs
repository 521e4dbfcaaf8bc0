//! Experiment orchestration for node-labeling algorithms: evaluation
//! reports with costs, approximation ratios, wins and optimality rates, the
//! runtime-scaling benchmark and the `nodelab` command line.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod output;

pub use bench::{bench_runtime, log_log_slope, BenchRow, BenchTable};
pub use config::{Algorithm, DatasetSource, ExperimentConfig, NamedGraph};
pub use error::{EvalError, Result};
pub use evaluate::{evaluate, evaluate_graphs, AlgorithmSummary, EvaluationReport, InstanceRecord, ReferenceKind};
pub use output::Format;
