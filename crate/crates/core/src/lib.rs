//! Detecting quantum phase transitions with geometric measures of
//! nonclassicality.
//!
//! The crate builds XY spin Hamiltonians along a parameter curve, extracts
//! ground or thermal states, and scans coherence, entanglement and discord
//! quantifiers for divergent susceptibilities. See `README.md` for the CLI.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod measures;
pub mod model;
pub mod optimize;
pub mod probe;
pub mod states;
pub mod sweep;

pub use error::{Error, Result};
