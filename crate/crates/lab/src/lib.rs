//! Experiment harness for minimal displacement vectors: the named demos,
//! the randomized bound suite, trace plots and report output.

pub mod demos;
pub mod files;
pub mod report;
pub mod suite;
pub mod trace;

pub use demos::{run_demo, DemoError, RunOptions};
pub use files::parse_operator_file;
pub use report::{CheckRecord, ExperimentReport, Verdict};
pub use suite::{run_random_suite, SuiteConfig, SuiteError};
pub use trace::{emit_trace, TraceRecord};
