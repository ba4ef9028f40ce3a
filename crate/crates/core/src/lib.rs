//! Targeted syntactic evaluation of language models and Maze reaction times.

pub mod analytics;
pub mod error;
pub mod maze;
pub mod ols;
pub mod par;
pub mod rng;
pub mod scoring;
pub mod simulate;
pub mod stats;
pub mod store;
pub mod suite;
pub mod surprisal;
pub mod trials;

pub use error::{Error, Result};
