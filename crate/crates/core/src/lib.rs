//! Perfectly matched layers for vacuum boundary conditions in radiative
//! transfer, discretized by the mixed even/odd PN finite element method.

pub mod angular;
pub mod assembly;
pub mod error;
pub mod mesh;
pub mod oracle;
pub mod pml;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
