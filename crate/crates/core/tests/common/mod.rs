#![allow(dead_code)]

use nalgebra::DMatrix;
use phonocat_core::fock::{DensityMatrix, FockOperator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random mixed state of rank `rank` with populations decaying over `dim` levels.
pub fn random_state(seed: u64, dim: usize, rank: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, rank, |n, _| {
        let damp = (-(n as f64) / 3.0).exp();
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * damp
    });
    DensityMatrix::from_unnormalized(&g * g.adjoint()).unwrap()
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Macroscopicity from the Fock basis:
/// `I = ¼(‖[x, ρ]‖² + ‖[p, ρ]‖²) − ½ tr ρ²` with Frobenius norms.
pub fn fock_macroscopicity(rho: &DensityMatrix) -> f64 {
    let d = rho.dim() + 1;
    let r = rho.resized(d).unwrap().into_matrix();
    let x = FockOperator::quadrature_x(d).into_matrix();
    let p = FockOperator::quadrature_p(d).into_matrix();
    let cx = &x * &r - &r * &x;
    let cp = &p * &r - &r * &p;
    0.25 * (cx.norm_squared() + cp.norm_squared()) - 0.5 * (&r * &r).trace().re
}
