use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::tolerances::DEFAULT_GRID_POINTS;

use super::functionals::{macroscopicity, negativity};
use super::wigner::{envelope_radius, wigner, GridSpec, WignerGrid};

/// Grid choices for [`report_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Points per axis of the coarse grid; the fine grid has `2n − 1`.
    pub grid_points: usize,
    /// Attempts at widening the window when the boundary check fails.
    pub max_enlargements: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { grid_points: DEFAULT_GRID_POINTS, max_enlargements: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonclassicalityReport {
    pub macroscopicity: f64,
    pub negativity: f64,
    pub mean_n: f64,
    /// Fine minus coarse estimate of each functional.
    pub macroscopicity_delta: f64,
    pub negativity_delta: f64,
    /// Fine grid actually used.
    pub grid: GridSpec,
}

/// Half-width that holds the state: at least `5√(⟨n⟩+1)`, widened to the
/// radius where the radial envelope of |W| falls below 1e−9.
fn half_width(rho: &DensityMatrix) -> f64 {
    let base = 5.0 * (rho.mean_number() + 1.0).sqrt();
    let q = rho.quadrature_moments();
    let reach = 1.5 * (base + 8.0 * q.max_variance().max(0.5).sqrt() + q.mean_x.hypot(q.mean_p));
    match envelope_radius(rho, 1e-9, reach) {
        Some(r) => base.max(r),
        None => reach,
    }
}

/// Wigner grid sized for `rho`, widened until the boundary check passes.
pub fn fitted_grid(rho: &DensityMatrix, options: &ReportOptions) -> Result<WignerGrid> {
    let mut width = half_width(rho);
    let mut last = None;
    for _ in 0..=options.max_enlargements {
        let spec = GridSpec::square(width, options.grid_points).refined();
        match wigner(rho, &spec) {
            Err(Error::GridTooSmall { boundary }) => {
                last = Some(boundary);
                width *= 1.3;
            }
            other => return other,
        }
    }
    Err(Error::GridTooSmall { boundary: last.unwrap_or(f64::NAN) })
}

pub fn report(rho: &DensityMatrix) -> Result<NonclassicalityReport> {
    report_with(rho, &ReportOptions::default())
}

pub fn report_with(rho: &DensityMatrix, options: &ReportOptions) -> Result<NonclassicalityReport> {
    report_on(rho, &fitted_grid(rho, options)?)
}

/// Report from an already evaluated grid of `rho`. The grid must have an odd
/// number of points per axis so that its every-other-point subgrid exists.
pub fn report_on(rho: &DensityMatrix, grid: &WignerGrid) -> Result<NonclassicalityReport> {
    let i = macroscopicity(grid)?;
    let n = negativity(grid)?;
    Ok(NonclassicalityReport {
        macroscopicity: i.value,
        negativity: n.value,
        mean_n: rho.mean_number(),
        macroscopicity_delta: i.delta(),
        negativity_delta: n.delta(),
        grid: grid.spec,
    })
}
