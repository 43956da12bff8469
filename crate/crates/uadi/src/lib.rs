//! Unified low-rank ADI solvers for Lyapunov, Sylvester and Riccati
//! equations driven by two shifted sparse solves per iteration.

pub mod bench;
pub mod classic;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod rom;
pub mod shifts;
pub mod system;

pub use error::{Result, UadiError};
