//! Numerical toolkit for the two-stage nested adiabatic search over structured
//! constraint-satisfaction problems.
//!
//! Stage I evolves each variable subset in parallel from the uniform
//! superposition to the uniform superposition over its local solutions. Stage II
//! runs a global search over the stage-I output to reach a joint solution.
//!
//! * [`spectral`]: closed-form two-level spectra per subsystem.
//! * [`schedule`]: stage-I time integral, stage-II iteration count, total time.
//! * [`complexity`]: average-case estimates and partition optimization.
//! * [`csp`]: random instances, constraint classification and exact census.
//! * [`dynamics`]: Schrödinger integration of both stages.
//! * [`report`]: sweeps, scaling fits and CSV/JSON records used by the CLI.

pub mod complexity;
pub mod csp;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod minimize;
pub mod quadrature;
pub mod report;
pub mod schedule;
pub mod spectral;

pub use error::{Error, Result};
