//! Computational tools for coloring t-chains of Boolean lattices.

pub mod bounds;
pub mod cache;
pub mod chains;
pub mod coloring;
pub mod copies;
pub mod error;
pub mod lattice;
pub mod lll;
pub mod numeric;
pub mod posets;
pub mod search;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
