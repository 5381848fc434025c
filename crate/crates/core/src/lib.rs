//! Numerical laboratory for classical mechanics as the high-entropy limit
//! of quantum mechanics: truncated Fock-space states, phase-space
//! quasi-probabilities, classical and quantum stretching maps, and the
//! Moyal/Poisson comparison.

pub mod case_studies;
pub mod entropy_curves;
pub mod error;
pub mod fock;
pub mod grid;
pub mod moyal_dynamics;
pub mod quasiprob;
pub mod stretch_classical;
pub mod stretch_quantum;
pub mod verify;

pub use error::{Error, Result};
