//! Truncated Fock-space linear algebra for a single bosonic mode (plus the
//! two-mode product space used by the brute-force heralding path).
//!
//! Quadratures follow `X₁ = (b† + b)/√2`, `X₂ = i(b† − b)/√2`, so the vacuum
//! variance of each is 1/2.

mod channel;
mod operator;
mod state;
mod states;
mod two_mode;

pub use channel::loss_channel;
pub use operator::{expectation, FockOperator};
pub use state::{DensityMatrix, QuadratureMoments, StateInvariants, StateRecord};
pub use states::{
    squeeze_operator, squeezed_thermal_converged, squeezed_thermal_state, thermal_state, MAX_SQUEEZING,
};
pub use two_mode::TwoModeState;

pub type C64 = num_complex::Complex64;
