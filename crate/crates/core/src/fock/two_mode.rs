use nalgebra::DMatrix;

use super::channel::{check_eta, loss_element};
use super::state::{hermitize, validate_state_matrix};
use super::{DensityMatrix, C64};
use crate::error::{Error, Result};
use crate::special::ln_factorials;

/// Mechanics ⊗ optics density matrix. Basis index `i_m · dim_o + i_o`
/// (mechanics varies slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    dim_m: usize,
    dim_o: usize,
    mat: DMatrix<C64>,
}

impl TwoModeState {
    pub fn new(dim_m: usize, dim_o: usize, mat: DMatrix<C64>) -> Result<Self> {
        let n = dim_m * dim_o;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: mat.nrows() });
        }
        validate_state_matrix(&mat)?;
        Ok(Self { dim_m, dim_o, mat })
    }

    /// Hermitizes and renormalizes, then validates.
    pub fn from_unnormalized(dim_m: usize, dim_o: usize, mut mat: DMatrix<C64>) -> Result<Self> {
        hermitize(&mut mat);
        let tr = mat.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("trace {tr:.3e} cannot be normalized")));
        }
        mat.unscale_mut(tr);
        Self::new(dim_m, dim_o, mat)
    }

    /// `ρ_m ⊗ ρ_o`.
    pub fn product(rho_m: &DensityMatrix, rho_o: &DensityMatrix) -> Self {
        Self {
            dim_m: rho_m.dim(),
            dim_o: rho_o.dim(),
            mat: rho_m.matrix().kronecker(rho_o.matrix()),
        }
    }

    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn dim_o(&self) -> usize {
        self.dim_o
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    #[inline]
    fn idx(&self, m: usize, o: usize) -> usize {
        m * self.dim_o + o
    }

    fn map_optical(&self, f: impl Fn(usize, usize, usize, usize) -> C64) -> DMatrix<C64> {
        let n = self.dim_m * self.dim_o;
        DMatrix::from_fn(n, n, |r, c| f(r / self.dim_o, r % self.dim_o, c / self.dim_o, c % self.dim_o))
    }

    /// Reduced mechanical state `tr_o ρ`.
    pub fn partial_trace_optical(&self) -> Result<DensityMatrix> {
        let out = DMatrix::from_fn(self.dim_m, self.dim_m, |a, b| {
            (0..self.dim_o).map(|o| self.mat[(self.idx(a, o), self.idx(b, o))]).sum()
        });
        DensityMatrix::new(out)
    }

    /// Reduced optical state `tr_m ρ`.
    pub fn partial_trace_mechanical(&self) -> Result<DensityMatrix> {
        let out = DMatrix::from_fn(self.dim_o, self.dim_o, |a, b| {
            (0..self.dim_m).map(|m| self.mat[(self.idx(m, a), self.idx(m, b))]).sum()
        });
        DensityMatrix::new(out)
    }

    /// Unnormalized mechanical block `⟨k|_o ρ |k⟩_o`; its trace is the
    /// probability of finding `k` optical quanta.
    pub fn optical_block(&self, k: usize) -> Result<DMatrix<C64>> {
        if k >= self.dim_o {
            return Err(Error::InvalidParameter(format!(
                "optical level {k} outside cutoff {}",
                self.dim_o
            )));
        }
        Ok(DMatrix::from_fn(self.dim_m, self.dim_m, |a, b| {
            self.mat[(self.idx(a, k), self.idx(b, k))]
        }))
    }

    /// Pure-loss channel of transmissivity `eta` on the optical mode.
    pub fn with_optical_loss(&self, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        if eta == 1.0 {
            return Ok(self.clone());
        }
        let lf = ln_factorials(self.dim_o);
        let d_o = self.dim_o;
        let mat = self.map_optical(|m1, o1, m2, o2| {
            loss_element(|i, k| self.mat[(self.idx(m1, i), self.idx(m2, k))], o1, o2, d_o, eta, &lf)
        });
        Self::new(self.dim_m, self.dim_o, mat)
    }

    /// Removes optical coherences between different photon numbers.
    pub fn dephased_optical(&self) -> Self {
        let mat = self.map_optical(|m1, o1, m2, o2| {
            if o1 == o2 {
                self.mat[(self.idx(m1, o1), self.idx(m2, o2))]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { dim_m: self.dim_m, dim_o: self.dim_o, mat }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{loss_channel, thermal_state};

    #[test]
    fn partial_traces_of_product() {
        let a = thermal_state(0.3, 20).unwrap();
        let b = thermal_state(0.7, 40).unwrap().resized(6).unwrap();
        let joint = TwoModeState::product(&a, &b);
        assert!((joint.partial_trace_optical().unwrap().matrix() - a.matrix()).camax() < 1e-14);
        assert!((joint.partial_trace_mechanical().unwrap().matrix() - b.matrix()).camax() < 1e-14);
    }

    #[test]
    fn optical_loss_acts_on_optical_factor_only() {
        let a = thermal_state(0.3, 20).unwrap();
        let b = DensityMatrix::fock(2, 5).unwrap();
        let joint = TwoModeState::product(&a, &b).with_optical_loss(0.4).unwrap();
        let want = loss_channel(&b, 0.4).unwrap();
        let got = joint.partial_trace_mechanical().unwrap();
        assert!((got.matrix() - want.matrix()).camax() < 1e-14);
    }

    #[test]
    fn rejects_wrong_shape() {
        let m = DMatrix::<C64>::identity(6, 6);
        assert!(matches!(TwoModeState::new(2, 2, m), Err(Error::DimensionMismatch { .. })));
    }
}
