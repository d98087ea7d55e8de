//! Error measurement, convergence and truncation studies, and the CLI.

pub mod cfgfile;
pub mod cli;
pub mod norms;
pub mod study;

pub use cfgfile::{load_config, parse_config};
pub use norms::{error_norms, interpolate_exact, zero_solution, ErrorReport, ReferenceField};
pub use study::{
    convergence_study, truncation_study, write_csv, ConvergenceTable, StudyConfig, TruncationTable,
};
