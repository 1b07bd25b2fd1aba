//! Wigner function on a rectangular grid and the two nonclassicality
//! functionals built on it:
//!
//! - macroscopicity `I = −(π/2) ∫∫ W (∂²ₓ + ∂²ₚ + 2) W dx dp`
//! - negativity `N = ½ (∫∫ |W| dx dp − 1)`
//!
//! Quadratures are dimensionless with vacuum variance 1/2, so the vacuum
//! Wigner function is `e^{−(x²+p²)}/π`.

mod functionals;
mod io;
mod report;
mod wigner;

pub use functionals::{macroscopicity, macroscopicity_with, negativity, Estimate, Laplacian};
pub use io::{format_float, GridMetadata};
pub use report::{fitted_grid, report, report_on, report_with, NonclassicalityReport, ReportOptions};
pub use wigner::{envelope_radius, wigner, wigner_at, GridSpec, WignerGrid};
