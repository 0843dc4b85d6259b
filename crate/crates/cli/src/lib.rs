//! Instance generation, property suites and replayable reports for the
//! `devissage` engine.

pub mod checks;
pub mod config;
pub mod gen;
pub mod instance;
pub mod oracle;
pub mod report;

pub use config::{Caps, Kind, Suite, SuiteConfig};
pub use report::{replay, run_suite, Report, TrialRecord};
