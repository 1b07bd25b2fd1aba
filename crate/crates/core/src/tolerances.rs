//! Every numerical threshold used by the library, collected in one record.

/// Numerical tolerances shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// max |ρ − ρ†|.
    pub hermiticity: f64,
    /// |tr ρ − 1| after a normalizing operation.
    pub trace: f64,
    /// Smallest admissible eigenvalue of a state.
    pub psd: f64,
    /// Population allowed in the top `tail_levels` Fock levels of a converged state.
    pub truncation_tail: f64,
    pub tail_levels: usize,
    /// Top-level population targeted when a cutoff is chosen automatically.
    /// Wigner values err by roughly the square root of this.
    pub adaptive_tail: f64,
    /// Trace lost when building a state on a truncated space.
    pub cutoff_deficit: f64,
    /// Unitarity defect of the two-mode beamsplitter sectors.
    pub unitarity: f64,
    /// Relative residual of the Lyapunov solve.
    pub lyapunov_residual: f64,
    /// Heisenberg-validity eigenvalue floor of a covariance matrix.
    pub heisenberg: f64,
    /// Symmetry of a covariance matrix.
    pub covariance_symmetry: f64,
    /// Probabilities at or below this are treated as impossible events.
    pub zero_probability: f64,
    /// |∫∫W − 1| on an accepted grid.
    pub wigner_normalization: f64,
    /// Slack on the |W| ≤ 1/π bound.
    pub wigner_bound: f64,
    /// Largest |W| tolerated on the grid boundary.
    pub wigner_boundary: f64,
    /// Largest imaginary residue of W accepted before it is discarded.
    pub wigner_imaginary: f64,
    /// Relative change under grid refinement that counts as converged.
    pub refinement_relative: f64,
    /// Absolute floor for the refinement check (values near zero).
    pub refinement_absolute: f64,
    /// Raw negativity below this is a numerics bug, not clipped.
    pub negativity_floor: f64,
    /// Weak-coupling ratio: coupling rates at most this fraction of κ.
    pub weak_coupling: f64,
    /// Pulse regime: t_pulse · κ at least this.
    pub pulse_kappa_t: f64,
}

pub const TOL: Tolerances = Tolerances {
    hermiticity: 1e-12,
    trace: 1e-10,
    psd: -1e-9,
    truncation_tail: 1e-8,
    tail_levels: 5,
    adaptive_tail: 1e-14,
    cutoff_deficit: 1e-8,
    unitarity: 1e-9,
    lyapunov_residual: 1e-10,
    heisenberg: 1e-9,
    covariance_symmetry: 1e-12,
    zero_probability: 1e-300,
    wigner_normalization: 5e-4,
    wigner_bound: 1e-6,
    wigner_boundary: 1e-7,
    wigner_imaginary: 1e-10,
    refinement_relative: 1e-2,
    refinement_absolute: 1e-4,
    negativity_floor: -1e-4,
    weak_coupling: 0.1,
    pulse_kappa_t: 10.0,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}

/// Default mechanical Fock cutoff.
pub const DEFAULT_MECH_DIM: usize = 80;
/// Ceiling for automatic cutoff selection.
pub const MAX_ADAPTIVE_DIM: usize = 600;

/// Next cutoff tried by the automatic selection: about 25% larger, in steps of ten.
pub fn next_adaptive_dim(dim: usize) -> usize {
    ((dim + dim / 4).div_ceil(10) * 10).max(dim + 10).min(MAX_ADAPTIVE_DIM)
}
/// Default optical Fock cutoff for the two-mode oracle.
pub const DEFAULT_OPTICAL_DIM: usize = 25;
/// Default κ/Γ_m, from κ/2π = 1 GHz and Γ_m/2π = 100 kHz.
pub const DEFAULT_KAPPA_OVER_GAMMA: f64 = 1e4;
/// Default Wigner grid points per axis (coarse level; the fine level halves the spacing).
pub const DEFAULT_GRID_POINTS: usize = 512;
