use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The Fock cutoff cannot hold the requested state to the required accuracy.
    #[error("Fock cutoff {dim} too small (defect {defect:.3e})")]
    CutoffTooSmall { dim: usize, defect: f64 },

    /// Population pushed past the retained levels of a two-mode space.
    #[error("truncation tail population {tail:.3e} exceeds tolerance")]
    Truncation { tail: f64 },

    #[error("drift matrix is unstable (max real part of eigenvalues {max_real_part:.3e})")]
    Unstable { max_real_part: f64 },

    #[error("parameter regime violated: {0}")]
    RegimeViolation(String),

    #[error("conditioning on an event of probability {probability:.3e}")]
    ZeroProbability { probability: f64 },

    #[error("Wigner grid too small: boundary |W| = {boundary:.3e}")]
    GridTooSmall { boundary: f64 },

    #[error("{quantity} did not converge under grid refinement (delta {delta:.3e})")]
    NonConvergence { quantity: &'static str, delta: f64 },

    #[error("Lyapunov solve failed: {0}")]
    Lyapunov(String),

    #[error("raw Wigner negativity {0:.3e} is below the numerical floor")]
    NegativeNegativity(f64),
}
