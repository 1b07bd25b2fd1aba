use nalgebra::DMatrix;

use super::{DensityMatrix, C64};
use crate::error::{Error, Result};
use crate::special::{ln_binomial, ln_factorials, pow_u};

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("efficiency must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

/// Element `(a, b)` of `Σ_j K_j ρ K_j†` for the pure-loss Kraus set
/// `K_j = Σ_n √C(n,j) η^{(n−j)/2} (1−η)^{j/2} |n−j⟩⟨n|`.
///
/// `get(i, k)` reads the input at Fock indices `(i, k)`; indices run below `dim`.
pub(crate) fn loss_element(
    get: impl Fn(usize, usize) -> C64,
    a: usize,
    b: usize,
    dim: usize,
    eta: f64,
    lf: &[f64],
) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let base = pow_u(eta.sqrt(), a + b);
    if base == 0.0 {
        return acc;
    }
    let top = dim - a.max(b);
    for j in 0..top {
        let lossy = pow_u(1.0 - eta, j);
        if lossy == 0.0 {
            break;
        }
        let w = (0.5 * (ln_binomial(lf, a + j, j) + ln_binomial(lf, b + j, j))).exp();
        acc += get(a + j, b + j) * (w * lossy);
    }
    acc * base
}

/// Bosonic pure-loss channel of transmissivity `eta`.
pub fn loss_channel(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    if eta == 1.0 {
        return Ok(rho.clone());
    }
    let d = rho.dim();
    let lf = ln_factorials(d);
    let m = rho.matrix();
    let out = DMatrix::from_fn(d, d, |a, b| loss_element(|i, k| m[(i, k)], a, b, d, eta, &lf));
    DensityMatrix::from_unnormalized(out)
}
