//! Experiments, preconditioning studies and Matrix Market ingestion on top
//! of `gmres-forge-core`, plus the pieces of the `gmres-forge` command line.

pub mod error;
pub mod experiments;
pub mod forge_cli;
pub mod mtx;
pub mod precond;
pub mod table;

pub use error::{LabError, Result};
