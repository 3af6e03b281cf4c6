//! Generalized domino shuffling on edge-weighted Aztec diamond graphs.

pub mod arith;
pub mod diamond;
mod error;
pub mod exec;
pub mod oracle;
pub mod probs;
pub mod reduce;
pub mod regions;
pub mod render;
pub mod series;
pub mod shuffle;

pub use error::{Error, Result};
