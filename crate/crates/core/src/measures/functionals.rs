use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::C64;
use crate::tolerances::TOL;

use super::wigner::WignerGrid;

/// A grid functional evaluated at two resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Value on the fine grid.
    pub value: f64,
    /// Value on the same region at doubled spacing.
    pub coarse: f64,
}

impl Estimate {
    pub fn delta(&self) -> f64 {
        self.value - self.coarse
    }

    pub fn converged(&self) -> bool {
        let allowed = (TOL.refinement_relative * self.value.abs()).max(TOL.refinement_absolute);
        self.delta().abs() <= allowed
    }

    fn checked(self, quantity: &'static str) -> Result<Self> {
        if self.converged() {
            Ok(self)
        } else {
            Err(Error::NonConvergence { quantity, delta: self.delta() })
        }
    }
}

/// Discretization of `∂²ₓ + ∂²ₚ` used by [`macroscopicity_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Laplacian {
    /// FFT differentiation; W is treated as periodic, which is harmless once
    /// it has decayed at the boundary.
    #[default]
    Spectral,
    /// Fourth-order central differences with W = 0 outside the grid.
    FourthOrder,
}

/// Second derivative along contiguous rows of length `n` with spacing `h`.
fn spectral_rows(data: &mut [f64], n: usize, h: f64, planner: &mut FftPlanner<f64>) {
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let period = n as f64 * h;
    let factor: Vec<f64> = (0..n)
        .map(|k| {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = 2.0 * std::f64::consts::PI * kk / period;
            -w * w / n as f64
        })
        .collect();
    let mut buf: Vec<C64> = data.iter().map(|&v| C64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for row in buf.chunks_mut(n) {
        for (z, f) in row.iter_mut().zip(&factor) {
            *z *= *f;
        }
    }
    inv.process(&mut buf);
    for (d, z) in data.iter_mut().zip(&buf) {
        *d = z.re;
    }
}

fn spectral_laplacian(grid: &WignerGrid) -> Vec<f64> {
    let (nx, np) = (grid.spec.nx, grid.spec.np);
    let mut planner = FftPlanner::new();
    let mut dpp = grid.values.clone();
    spectral_rows(&mut dpp, np, grid.spec.dp(), &mut planner);
    let mut dxx: Vec<f64> = (0..np * nx).map(|k| grid.values[(k % nx) * np + k / nx]).collect();
    spectral_rows(&mut dxx, nx, grid.spec.dx(), &mut planner);
    (0..nx * np).map(|k| dpp[k] + dxx[(k % np) * nx + k / np]).collect()
}

fn fourth_order_laplacian(grid: &WignerGrid) -> Vec<f64> {
    let (nx, np) = (grid.spec.nx, grid.spec.np);
    let (hx2, hp2) = (grid.spec.dx().powi(2), grid.spec.dp().powi(2));
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= nx as isize || j >= np as isize {
            0.0
        } else {
            grid.value(i as usize, j as usize)
        }
    };
    let second = |f: [f64; 5]| (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / 12.0;
    let mut out = vec![0.0; nx * np];
    for i in 0..nx as isize {
        for j in 0..np as isize {
            let dxx = second([at(i - 2, j), at(i - 1, j), at(i, j), at(i + 1, j), at(i + 2, j)]) / hx2;
            let dpp = second([at(i, j - 2), at(i, j - 1), at(i, j), at(i, j + 1), at(i, j + 2)]) / hp2;
            out[i as usize * np + j as usize] = dxx + dpp;
        }
    }
    out
}

fn macroscopicity_raw(grid: &WignerGrid, scheme: Laplacian) -> f64 {
    let lap = match scheme {
        Laplacian::Spectral => spectral_laplacian(grid),
        Laplacian::FourthOrder => fourth_order_laplacian(grid),
    };
    let integrand: Vec<f64> = grid.values.iter().zip(&lap).map(|(w, l)| w * (l + 2.0 * w)).collect();
    let weighted = WignerGrid { spec: grid.spec, values: integrand };
    -0.5 * PI * weighted.integrate(|v| v)
}

/// Monomial coefficients (in the cell coordinate t ∈ [0, 1]) of the cubic
/// through `y` at offsets `o`.
fn cubic_through(o: [f64; 4], y: [f64; 4]) -> [f64; 4] {
    let mut c = [0.0; 4];
    for k in 0..4 {
        // Π_{j≠k} (t − o_j) / (o_k − o_j), expanded.
        let mut poly = [1.0, 0.0, 0.0, 0.0];
        let mut denom = 1.0;
        let mut deg = 0;
        for j in 0..4 {
            if j == k {
                continue;
            }
            for d in (0..=deg).rev() {
                poly[d + 1] += poly[d];
                poly[d] *= -o[j];
            }
            deg += 1;
            denom *= o[k] - o[j];
        }
        for d in 0..4 {
            c[d] += y[k] * poly[d] / denom;
        }
    }
    c
}

fn cubic_eval(c: &[f64; 4], t: f64) -> f64 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

fn cubic_antiderivative(c: &[f64; 4], t: f64) -> f64 {
    (((0.25 * c[3] * t + c[2] / 3.0) * t + 0.5 * c[1]) * t + c[0]) * t
}

/// `∫₀¹ min(p(t), 0) dt` for a cubic `p`.
fn cubic_negative_part(c: &[f64; 4]) -> f64 {
    // Split [0, 1] at critical points so p is monotone on each piece.
    let mut cuts = vec![0.0, 1.0];
    let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
    if qa.abs() > 1e-300 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let sq = disc.sqrt();
            cuts.push((-qb + sq) / (2.0 * qa));
            cuts.push((-qb - sq) / (2.0 * qa));
        }
    } else if qb.abs() > 1e-300 {
        cuts.push(-qc / qb);
    }
    cuts.retain(|t| (0.0..=1.0).contains(t));
    cuts.sort_by(|a, b| a.total_cmp(b));
    let mut points = Vec::with_capacity(8);
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        points.push(lo);
        let (flo, fhi) = (cubic_eval(c, lo), cubic_eval(c, hi));
        if flo * fhi < 0.0 {
            let rising = fhi > flo;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (cubic_eval(c, mid) > 0.0) == rising {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            points.push(0.5 * (lo + hi));
        }
    }
    points.push(1.0);
    points
        .windows(2)
        .filter(|w| w[1] > w[0] && cubic_eval(c, 0.5 * (w[0] + w[1])) < 0.0)
        .map(|w| cubic_antiderivative(c, w[1]) - cubic_antiderivative(c, w[0]))
        .sum()
}

/// `∫ min(f, 0)` along one line of samples with spacing `h`, using the local
/// cubic interpolant on every cell that can hold negative values.
fn negative_line_integral(vals: &[f64], h: f64) -> f64 {
    let n = vals.len();
    let mut acc = 0.0;
    for cell in 0..n - 1 {
        let s = cell.saturating_sub(1).min(n - 4);
        let y = [vals[s], vals[s + 1], vals[s + 2], vals[s + 3]];
        if y.iter().all(|&v| v >= 0.0) {
            continue;
        }
        let o = [0, 1, 2, 3].map(|k| (s + k) as f64 - cell as f64);
        let c = cubic_through(o, y);
        acc += if y.iter().all(|&v| v <= 0.0) {
            cubic_antiderivative(&c, 1.0)
        } else {
            cubic_negative_part(&c)
        };
    }
    acc * h
}

/// `∫∫ min(W, 0)`: cubic line integrals along x, trapezoid across p.
fn negative_volume(grid: &WignerGrid) -> f64 {
    let (nx, np) = (grid.spec.nx, grid.spec.np);
    let mut column = vec![0.0; nx];
    let mut total = 0.0;
    for j in 0..np {
        for (i, v) in column.iter_mut().enumerate() {
            *v = grid.value(i, j);
        }
        let wj = if j == 0 || j == np - 1 { 0.5 } else { 1.0 };
        total += wj * negative_line_integral(&column, grid.spec.dx());
    }
    total * grid.spec.dp()
}

/// `½(∫|W| − 1)` with `|W| = W − 2 min(W, 0)`.
fn negativity_raw(grid: &WignerGrid) -> f64 {
    0.5 * (grid.integrate(|w| w) - 1.0) - negative_volume(grid)
}

/// `I = −(π/2) ∫∫ W (∇² + 2) W`, checked against the half-resolution grid.
pub fn macroscopicity(grid: &WignerGrid) -> Result<Estimate> {
    macroscopicity_with(grid, Laplacian::default())
}

pub fn macroscopicity_with(grid: &WignerGrid, scheme: Laplacian) -> Result<Estimate> {
    let coarse = grid.coarsened()?;
    Estimate { value: macroscopicity_raw(grid, scheme), coarse: macroscopicity_raw(&coarse, scheme) }
        .checked("macroscopicity")
}

/// `N = ½(∫∫|W| − 1)`, clipped at zero after the floor check.
pub fn negativity(grid: &WignerGrid) -> Result<Estimate> {
    let coarse = grid.coarsened()?;
    let value = negativity_raw(grid);
    if value < TOL.negativity_floor {
        return Err(Error::NegativeNegativity(value));
    }
    Estimate { value: value.max(0.0), coarse: negativity_raw(&coarse).max(0.0) }.checked("negativity")
}
