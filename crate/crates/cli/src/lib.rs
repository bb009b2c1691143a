//! File formats, benchmarks and verification for the `netinv` solver, plus
//! the `netinv` command line built on them.

pub mod bench;
pub mod error;
pub mod io;
pub mod report;
pub mod verify;

pub use error::CliError;
pub use report::RunReport;
