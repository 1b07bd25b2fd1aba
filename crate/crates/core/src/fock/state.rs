use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::C64;
use crate::error::{Error, Result};
use crate::tolerances::TOL;

/// Single-mode density matrix on a truncated Fock space.
///
/// Construction validates hermiticity, unit trace and positivity against
/// [`TOL`]; every value of this type satisfies them.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

/// First and second moments of the quadratures `X₁`, `X₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// Symmetrized covariance `⟨{ΔX₁, ΔX₂}⟩/2`.
    pub cov_xp: f64,
}

impl QuadratureMoments {
    /// Largest eigenvalue of the 2×2 quadrature covariance.
    pub fn max_variance(&self) -> f64 {
        let mean = 0.5 * (self.var_x + self.var_p);
        let diff = 0.5 * (self.var_x - self.var_p);
        mean + (diff * diff + self.cov_xp * self.cov_xp).sqrt()
    }
}

/// Defects measured by [`DensityMatrix::invariants`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateInvariants {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    /// Population of the top `TOL.tail_levels` levels.
    pub tail: f64,
}

impl StateInvariants {
    /// Hermiticity, trace and PSD within [`TOL`], tail within the truncation tolerance.
    pub fn hold(&self) -> bool {
        self.hermiticity <= TOL.hermiticity
            && self.trace_error <= TOL.trace
            && self.min_eigenvalue >= TOL.psd
            && self.tail <= TOL.truncation_tail
    }
}

/// JSON form `{dim, re[][], im[][]}` used by `--dump-state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Real symmetric matrix with the spectrum of the Hermitian `m`:
/// `A + iB` maps to `[[A, −B], [B, A]]` (each value twice), or to `A` when `B = 0`.
fn real_embedding(m: &DMatrix<C64>) -> DMatrix<f64> {
    let n = m.nrows();
    let real = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re)
    } else {
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = m[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    };
    (&real + real.transpose()) * 0.5
}

/// Smallest eigenvalue of a Hermitian matrix, via the real symmetric solver.
pub(crate) fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let real = real_embedding(m);
    let lowest = |a: &DMatrix<f64>| a.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    let lo = lowest(&real);
    if lo.is_finite() {
        return lo;
    }
    // Shifted retry when the QR iteration diverges.
    let dim = real.nrows();
    for shift in [1.0, 0.5, 2.0] {
        let lo = lowest(&(&real + DMatrix::<f64>::identity(dim, dim) * shift));
        if lo.is_finite() {
            return lo - shift;
        }
    }
    f64::NEG_INFINITY
}

/// True when `m - floor·I` is positive definite, i.e. every eigenvalue
/// exceeds `floor` (a negative number) up to rounding.
fn psd_within(m: &DMatrix<C64>, floor: f64) -> bool {
    let mut real = real_embedding(m);
    for i in 0..real.nrows() {
        real[(i, i)] -= floor;
    }
    nalgebra::Cholesky::new(real).is_some()
}

/// Checks the three state invariants on a raw matrix.
pub(crate) fn validate_state_matrix(m: &DMatrix<C64>) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::InvalidState(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite element".into()));
    }
    let herm = hermiticity_defect(m);
    if herm > TOL.hermiticity {
        return Err(Error::InvalidState(format!("hermiticity defect {herm:.3e}")));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TOL.trace {
        return Err(Error::InvalidState(format!("trace {:.12}", tr.re)));
    }
    if !psd_within(m, TOL.psd) {
        let lo = min_eigenvalue(m);
        return Err(Error::InvalidState(format!("minimum eigenvalue {lo:.3e}")));
    }
    Ok(())
}

impl DensityMatrix {
    /// Validates and wraps a matrix.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        validate_state_matrix(&mat)?;
        Ok(Self { mat })
    }

    /// Hermitizes and renormalizes an (unnormalized) positive operator, then validates.
    pub fn from_unnormalized(mut mat: DMatrix<C64>) -> Result<Self> {
        hermitize(&mut mat);
        let tr = mat.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("trace {tr:.3e} cannot be normalized")));
        }
        mat.unscale_mut(tr);
        Self::new(mat)
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::fock(0, dim).expect("vacuum fits in any non-empty space")
    }

    /// `|n⟩⟨n|`.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParameter(format!("Fock level {n} needs dim > {n}")));
        }
        let mut mat = DMatrix::zeros(dim, dim);
        mat[(n, n)] = C64::new(1.0, 0.0);
        Ok(Self { mat })
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        let norm2 = psi.norm_squared();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        Self::from_unnormalized(psi * psi.adjoint() / C64::new(norm2, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Diagonal `⟨n|ρ|n⟩`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.mat[(n, n)].re).collect()
    }

    /// `⟨b†b⟩`.
    pub fn mean_number(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.mat[(n, n)].re).sum()
    }

    /// Population held in the top `levels` Fock states.
    pub fn tail_population(&self, levels: usize) -> f64 {
        let d = self.dim();
        let start = d.saturating_sub(levels);
        (start..d).map(|n| self.mat[(n, n)].re.max(0.0)).sum()
    }

    /// Fails unless the top levels are essentially empty.
    pub fn ensure_converged(&self) -> Result<()> {
        let tail = self.tail_population(TOL.tail_levels);
        if tail > TOL.truncation_tail {
            return Err(Error::CutoffTooSmall { dim: self.dim(), defect: tail });
        }
        Ok(())
    }

    /// Measured defects of the state invariants.
    pub fn invariants(&self) -> StateInvariants {
        StateInvariants {
            hermiticity: hermiticity_defect(&self.mat),
            trace_error: (self.trace() - 1.0).abs(),
            min_eigenvalue: min_eigenvalue(&self.mat),
            tail: self.tail_population(TOL.tail_levels),
        }
    }

    /// Smallest cutoff keeping every level whose population exceeds `threshold`.
    pub fn effective_dim(&self, threshold: f64) -> usize {
        let pops = self.populations();
        pops.iter().rposition(|&p| p > threshold).map_or(1, |k| k + 1)
    }

    pub fn quadrature_moments(&self) -> QuadratureMoments {
        let d = self.dim();
        let mut b = C64::new(0.0, 0.0);
        let mut b2 = C64::new(0.0, 0.0);
        for n in 1..d {
            b += self.mat[(n, n - 1)] * (n as f64).sqrt();
            if n >= 2 {
                b2 += self.mat[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt();
            }
        }
        let nbar = self.mean_number();
        let mean_x = std::f64::consts::SQRT_2 * b.re;
        let mean_p = std::f64::consts::SQRT_2 * b.im;
        let x2 = b2.re + nbar + 0.5;
        let p2 = -b2.re + nbar + 0.5;
        QuadratureMoments {
            mean_x,
            mean_p,
            var_x: x2 - mean_x * mean_x,
            var_p: p2 - mean_p * mean_p,
            cov_xp: b2.im - mean_x * mean_p,
        }
    }

    /// `e^{−iφ b†b} ρ e^{iφ b†b}`, a rotation of phase space by φ.
    pub fn rotated(&self, phi: f64) -> Self {
        let mat = DMatrix::from_fn(self.dim(), self.dim(), |j, k| {
            self.mat[(j, k)] * C64::from_polar(1.0, -phi * (j as f64 - k as f64))
        });
        Self { mat }
    }

    /// Embeds into a larger space or truncates (renormalizing) into a smaller one.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        let keep = dim.min(self.dim());
        let mut mat = DMatrix::zeros(dim, dim);
        mat.view_mut((0, 0), (keep, keep)).copy_from(&self.mat.view((0, 0), (keep, keep)));
        Self::from_unnormalized(mat)
    }

    pub fn to_record(&self) -> StateRecord {
        let d = self.dim();
        StateRecord {
            dim: d,
            re: (0..d).map(|i| (0..d).map(|j| self.mat[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| self.mat[(i, j)].im).collect()).collect(),
        }
    }

    pub fn from_record(rec: &StateRecord) -> Result<Self> {
        let d = rec.dim;
        let shape_ok = rec.re.len() == d
            && rec.im.len() == d
            && rec.re.iter().chain(rec.im.iter()).all(|row| row.len() == d);
        if !shape_ok {
            return Err(Error::InvalidState(format!("record rows do not match dim {d}")));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| C64::new(rec.re[i][j], rec.im[i][j])))
    }
}
