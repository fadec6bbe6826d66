//! Weighted GMRES, convergence curves, and constructions of linear systems,
//! weights and preconditioners that realize prescribed convergence curves.

pub mod analysis;
pub mod curves;
pub mod error;
pub mod forge;
pub mod krylov;
pub mod numkernel;

pub use error::{Error, Result};
