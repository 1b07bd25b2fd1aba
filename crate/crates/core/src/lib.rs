//! Numerics for heralded phonon subtraction from a squeezed thermal mechanical
//! oscillator in cavity optomechanics.
//!
//! - [`fock`]: truncated Fock-space states, operators and channels.
//! - [`steady_state`]: two-tone dissipative squeezing steady state (Lyapunov).
//! - [`subtraction`]: beamsplitter interaction, photon-counting herald, rates.
//! - [`measures`]: Wigner function on a grid, macroscopicity and negativity.

pub mod error;
pub mod fock;
pub mod measures;
mod special;
pub mod steady_state;
pub mod subtraction;
pub mod tolerances;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockOperator, TwoModeState};
pub use measures::{GridSpec, NonclassicalityReport, WignerGrid};
pub use steady_state::{CovarianceMatrix, SqueezeDriveParams};
pub use subtraction::{HeraldedResult, PulseParams};
pub use tolerances::{Tolerances, TOL};
