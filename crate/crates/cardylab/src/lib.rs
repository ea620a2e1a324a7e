//! Experiment harness for `cardylab-core`: domain files, a multi-threaded
//! executor, experiment runners and report emitters.

pub mod config;
pub mod domain_file;
pub mod error;
pub mod exec;
pub mod num;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, Format, Params};
pub use domain_file::DomainFile;
pub use error::HarnessError;
pub use exec::Parallel;
pub use report::{emit, SweepReport, Timings, Verdict};
pub use run::run;
