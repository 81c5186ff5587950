//! File formats and command line for the prefracture pipeline.
//!
//! The numerical work lives in `prefracture_core`; this crate reads and
//! writes OBJ meshes and the JSON artifacts passed between pipeline stages,
//! and exposes every stage as a subcommand.

pub mod cli;
pub mod error;
pub mod formats;
pub mod obj;
pub mod pipeline;

pub use error::{Error, Result};
