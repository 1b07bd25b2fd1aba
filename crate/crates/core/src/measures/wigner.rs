use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, C64};
use crate::tolerances::TOL;

/// Axis bounds and sizes of a Wigner grid. Points include both end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl GridSpec {
    /// Square grid `[−half_width, half_width]²` with `n` points per axis.
    pub fn square(half_width: f64, n: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, p_min: -half_width, p_max: half_width, nx: n, np: n }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max].iter().all(|v| v.is_finite());
        if !finite || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::InvalidParameter(format!("bad grid bounds {self:?}")));
        }
        if self.nx < 5 || self.np < 5 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 5 points per axis, got {}x{}",
                self.nx, self.np
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    /// Same region with the spacing halved on both axes.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, np: 2 * self.np - 1, ..*self }
    }

    fn max_radius(&self) -> f64 {
        let rx = self.x_min.abs().max(self.x_max.abs());
        let rp = self.p_min.abs().max(self.p_max.abs());
        rx.hypot(rp)
    }
}

/// Sampled `W(x, p)`; `values[i * np + j] = W(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.nx * spec.np {
            return Err(Error::DimensionMismatch { expected: spec.nx * spec.np, found: values.len() });
        }
        Ok(Self { spec, values })
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.np + j]
    }

    /// Trapezoidal `∫∫ f(W) dx dp`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (nx, np) = (self.spec.nx, self.spec.np);
        let mut total = 0.0;
        for i in 0..nx {
            let wi = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            let row = &self.values[i * np..(i + 1) * np];
            let mut acc = 0.5 * (f(row[0]) + f(row[np - 1]));
            for &v in &row[1..np - 1] {
                acc += f(v);
            }
            total += wi * acc;
        }
        total * self.spec.dx() * self.spec.dp()
    }

    /// Largest |W| on the outer frame of the grid.
    pub fn boundary_max(&self) -> f64 {
        let (nx, np) = (self.spec.nx, self.spec.np);
        let mut worst = 0.0f64;
        for i in 0..nx {
            worst = worst.max(self.value(i, 0).abs()).max(self.value(i, np - 1).abs());
        }
        for j in 0..np {
            worst = worst.max(self.value(0, j).abs()).max(self.value(nx - 1, j).abs());
        }
        worst
    }

    /// Every other point on each axis (same region, doubled spacing).
    pub fn coarsened(&self) -> Result<Self> {
        let spec = &self.spec;
        let (cx, cp) = (spec.nx.div_ceil(2), spec.np.div_ceil(2));
        let coarse = GridSpec {
            x_max: spec.x(2 * (cx - 1)),
            p_max: spec.p(2 * (cp - 1)),
            nx: cx,
            np: cp,
            ..*spec
        };
        let mut values = Vec::with_capacity(cx * cp);
        for i in 0..cx {
            for j in 0..cp {
                values.push(self.value(2 * i, 2 * j));
            }
        }
        Self::new(coarse, values)
    }
}

/// Radius-independent pieces of the Laguerre-function recurrence for one order L.
struct Recurrence {
    l: f64,
    /// `½ ln L!`
    half_ln_fact: f64,
    /// `√(n(n+L))` for `n = 0..count`.
    back: Vec<f64>,
    /// `1/√((n+1)(n+L+1))` for `n = 0..count`.
    scale: Vec<f64>,
}

impl Recurrence {
    fn new(l: usize, count: usize) -> Self {
        let lf = l as f64;
        Self {
            l: lf,
            half_ln_fact: 0.5 * (1..=l).map(|k| (k as f64).ln()).sum::<f64>(),
            back: (0..count).map(|n| (n as f64 * (n as f64 + lf)).sqrt()).collect(),
            scale: (0..count).map(|n| 1.0 / ((n as f64 + 1.0) * (n as f64 + lf + 1.0)).sqrt()).collect(),
        }
    }

    /// `ψ_n^L(s) = √(n!/(n+L)!) s^{L/2} e^{−s/2} L_n^L(s)` for `n < out.len()`,
    /// by upward three-term recurrence on the normalized functions.
    fn fill(&self, s: f64, out: &mut [f64]) {
        let count = out.len();
        if count == 0 {
            return;
        }
        let psi0 = if self.l == 0.0 {
            (-0.5 * s).exp()
        } else if s == 0.0 {
            0.0
        } else {
            (0.5 * self.l * s.ln() - 0.5 * s - self.half_ln_fact).exp()
        };
        out[0] = psi0;
        if count == 1 {
            return;
        }
        out[1] = (1.0 + self.l - s) * psi0 * self.scale[0];
        for n in 1..count - 1 {
            out[n + 1] = ((2.0 * n as f64 + 1.0 + self.l - s) * out[n] - self.back[n] * out[n - 1]) * self.scale[n];
        }
    }
}

#[cfg(test)]
fn laguerre_functions(l: usize, s: f64, count: usize, out: &mut [f64]) {
    Recurrence::new(l, count).fill(s, &mut out[..count]);
}

/// Diagonals of ρ that contribute: `(L, ρ_{n,n+L})` with negligible ones dropped.
fn active_diagonals(rho: &DensityMatrix, dim: usize) -> Vec<(usize, Vec<C64>)> {
    let m = rho.matrix();
    (0..dim)
        .filter_map(|l| {
            let diag: Vec<C64> = (0..dim - l)
                .map(|n| if n % 2 == 0 { m[(n, n + l)] } else { -m[(n, n + l)] })
                .collect();
            let big = diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
            (big > 1e-18).then_some((l, diag))
        })
        .collect()
}

/// Cutoff below which the populations (and so all coherences) are negligible.
fn working_dim(rho: &DensityMatrix) -> usize {
    rho.effective_dim(1e-28).max(1)
}

/// Exact `W(x, p)` at a single point (no tabulation).
pub fn wigner_at(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    let dim = working_dim(rho);
    let s = 2.0 * (x * x + p * p);
    let z = if x == 0.0 && p == 0.0 { C64::new(1.0, 0.0) } else { C64::new(x, p) / x.hypot(p) };
    let mut psi = vec![0.0; dim];
    let mut acc = 0.0;
    for (l, diag) in active_diagonals(rho, dim) {
        Recurrence::new(l, diag.len()).fill(s, &mut psi[..diag.len()]);
        let f: C64 = diag.iter().zip(&psi).map(|(r, q)| r * q).sum();
        if l == 0 {
            acc += f.re;
        } else {
            acc += 2.0 * (f * z.powu(l as u32)).re;
        }
    }
    acc / PI
}

/// Radial tables `f_L(r) = Σ_n (−1)ⁿ ρ_{n,n+L} ψ_n^L(2r²)` on a uniform radius grid.
struct RadialTables {
    step: f64,
    orders: Vec<usize>,
    /// `tables[k][i]` for order `orders[k]` at radius `i * step`.
    tables: Vec<Vec<C64>>,
}

const STENCIL: usize = 6;

impl RadialTables {
    fn build(rho: &DensityMatrix, r_max: f64) -> Self {
        // Highest local wavenumber of ψ_n^L in r is about 2√(4(n+L)+2).
        let k_max = 2.0 * (4.0 * working_dim(rho) as f64 + 2.0).sqrt();
        Self::build_with_step(rho, r_max, (0.08 / k_max).min(0.01))
    }

    fn build_with_step(rho: &DensityMatrix, r_max: f64, step: f64) -> Self {
        let dim = working_dim(rho);
        let diags = active_diagonals(rho, dim);
        let count = (r_max / step).ceil() as usize + STENCIL + 1;
        let recs: Vec<Recurrence> = diags.iter().map(|(l, diag)| Recurrence::new(*l, diag.len())).collect();
        let mut psi = vec![0.0; dim];
        let mut tables = vec![Vec::with_capacity(count); diags.len()];
        for i in 0..count {
            let r = i as f64 * step;
            let s = 2.0 * r * r;
            for (k, (_, diag)) in diags.iter().enumerate() {
                let psi = &mut psi[..diag.len()];
                recs[k].fill(s, psi);
                tables[k].push(diag.iter().zip(psi.iter()).map(|(a, b)| a * b).sum());
            }
        }
        Self { step, orders: diags.into_iter().map(|(l, _)| l).collect(), tables }
    }

    fn evaluate(&self, x: f64, p: f64, powers: &mut Vec<C64>) -> f64 {
        let r = x.hypot(p);
        let t = r / self.step;
        let len = self.tables.first().map_or(0, Vec::len);
        let start = (t.floor() as isize - (STENCIL as isize / 2 - 1)).clamp(0, (len - STENCIL) as isize) as usize;
        // Lagrange weights on nodes start..start+STENCIL.
        let mut w = [0.0; STENCIL];
        for (a, wa) in w.iter_mut().enumerate() {
            let ta = (start + a) as f64;
            let mut prod = 1.0;
            for b in 0..STENCIL {
                if b != a {
                    let tb = (start + b) as f64;
                    prod *= (t - tb) / (ta - tb);
                }
            }
            *wa = prod;
        }
        let z = if r == 0.0 { C64::new(1.0, 0.0) } else { C64::new(x / r, p / r) };
        let top = self.orders.last().copied().unwrap_or(0);
        powers.clear();
        let mut zp = C64::new(1.0, 0.0);
        for _ in 0..=top {
            powers.push(zp);
            zp *= z;
        }
        let mut acc = 0.0;
        for (k, &l) in self.orders.iter().enumerate() {
            let tab = &self.tables[k][start..start + STENCIL];
            let f: C64 = tab.iter().zip(&w).map(|(v, wa)| v * *wa).sum();
            if l == 0 {
                acc += f.re;
            } else {
                acc += 2.0 * (f * powers[l]).re;
            }
        }
        acc / PI
    }
}

/// Radius beyond which `|W|` provably stays below `threshold` (up to the
/// sampling of the radial envelope), searched out to `r_max`.
///
/// Uses `max_φ |W(r, φ)| ≤ (|f_0(r)| + 2 Σ_L |f_L(r)|)/π`. Returns `None` when
/// the envelope is still above `threshold` at `r_max`.
pub fn envelope_radius(rho: &DensityMatrix, threshold: f64, r_max: f64) -> Option<f64> {
    let step = 0.02;
    let tables = RadialTables::build_with_step(rho, r_max, step);
    let count = (r_max / step).ceil() as usize;
    let bound = |i: usize| -> f64 {
        tables
            .orders
            .iter()
            .zip(&tables.tables)
            .map(|(&l, t)| if l == 0 { t[i].norm() } else { 2.0 * t[i].norm() })
            .sum::<f64>()
            / PI
    };
    if bound(count) > threshold {
        return None;
    }
    let last = (0..=count).rev().find(|&i| bound(i) > threshold);
    Some(last.map_or(0.0, |i| (i + 1) as f64 * step))
}

/// Samples the Wigner function of `rho` on `spec`.
///
/// Errors when the grid clips the distribution (boundary |W| above tolerance),
/// when the grid integral misses unity, or when the `1/π` bound fails.
pub fn wigner(rho: &DensityMatrix, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    let imag: f64 = (0..rho.dim()).map(|n| rho.matrix()[(n, n)].im.abs()).sum();
    if imag > TOL.wigner_imaginary {
        return Err(Error::InvalidState(format!("imaginary residue {imag:.3e} on the diagonal")));
    }
    let tables = RadialTables::build(rho, spec.max_radius());
    let np = spec.np;
    let mut values = vec![0.0; spec.nx * np];
    values.par_chunks_mut(np).enumerate().for_each_init(Vec::new, |powers, (i, row)| {
        let x = spec.x(i);
        for (j, v) in row.iter_mut().enumerate() {
            *v = tables.evaluate(x, spec.p(j), powers);
        }
    });
    let grid = WignerGrid::new(*spec, values)?;

    let boundary = grid.boundary_max();
    if boundary > TOL.wigner_boundary {
        return Err(Error::GridTooSmall { boundary });
    }
    let norm = grid.integrate(|w| w);
    if (norm - 1.0).abs() > TOL.wigner_normalization {
        return Err(Error::NonConvergence { quantity: "Wigner normalization", delta: norm - 1.0 });
    }
    let peak = grid.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak > 1.0 / PI + TOL.wigner_bound {
        return Err(Error::InvalidState(format!("|W| = {peak:.6} exceeds 1/pi")));
    }
    Ok(grid)
}
