use std::ops::Mul;

use nalgebra::DMatrix;

use super::{DensityMatrix, C64};
use crate::error::{Error, Result};

/// A linear operator on the truncated Fock space `|0⟩ … |D−1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    mat: DMatrix<C64>,
}

impl FockOperator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "operator matrix must be square and non-empty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim) }
    }

    /// Lowering operator `b`: `⟨n−1|b|n⟩ = √n`.
    pub fn annihilation(dim: usize) -> Self {
        let mut mat = DMatrix::zeros(dim, dim);
        for n in 1..dim {
            mat[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self { mat }
    }

    pub fn creation(dim: usize) -> Self {
        Self::annihilation(dim).adjoint()
    }

    /// `b†b`, diagonal `0 … D−1`.
    pub fn number(dim: usize) -> Self {
        Self {
            mat: DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    C64::new(i as f64, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// `X₁ = (b† + b)/√2`.
    pub fn quadrature_x(dim: usize) -> Self {
        let b = Self::annihilation(dim).mat;
        Self { mat: (b.adjoint() + b) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0) }
    }

    /// `X₂ = i(b† − b)/√2`.
    pub fn quadrature_p(dim: usize) -> Self {
        let b = Self::annihilation(dim).mat;
        Self { mat: (b.adjoint() - b) * C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2) }
    }

    /// `e^{−iφ b†b}`.
    pub fn phase_rotation(phi: f64, dim: usize) -> Self {
        Self {
            mat: DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    C64::from_polar(1.0, -phi * i as f64)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
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

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    /// `max |U†U − I|` over the leading `cols × cols` block.
    pub fn unitarity_defect(&self, cols: usize) -> f64 {
        let cols = cols.min(self.dim());
        let u = self.mat.columns(0, cols);
        let g = u.adjoint() * u;
        let mut worst = 0.0f64;
        for i in 0..cols {
            for j in 0..cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { mat: &self.mat * &rhs.mat }
    }
}

/// `tr(ρ · op)`.
pub fn expectation(rho: &DensityMatrix, op: &FockOperator) -> Result<C64> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: op.dim() });
    }
    let r = rho.matrix();
    let o = op.matrix();
    let d = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += r[(i, k)] * o[(k, i)];
        }
    }
    Ok(acc)
}
