//! Simulation and cut-structure analysis for near-critical random walks on
//! the half-line and their multidimensional zero-drift relatives.

pub mod cuts;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod hitting;
pub mod io;
pub mod kernel;
pub mod lyapunov;
pub mod moments;
pub mod profile;
pub mod rng;
pub mod skeleton;
pub mod stats;
pub mod trajectory;

pub use error::{Error, Result};
