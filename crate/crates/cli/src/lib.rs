//! Corpus generation, suite orchestration and report files for the
//! `rearr-core` checkers.

pub mod corpus;
pub mod error;
pub mod formats;
pub mod report;
pub mod suite;

pub use corpus::{generate_corpus, CorpusItem, CorpusSpec, Family, GridSpec};
pub use error::{CliError, Result};
pub use report::{emit_report, parse_report, Format, ReportFile, View};
pub use suite::{run_suite, InequalityEntry, ReportRecord, Status, SuiteConfig, SuiteResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "REARR_OUT_DIR";
