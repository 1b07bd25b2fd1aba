use nalgebra::{DMatrix, SymmetricEigen};

use super::{DensityMatrix, FockOperator, C64};
use crate::error::{Error, Result};
use crate::tolerances::{next_adaptive_dim, MAX_ADAPTIVE_DIM, TOL};

/// Largest |r| accepted by the squeezing routines.
pub const MAX_SQUEEZING: f64 = 3.0;

fn working_dim(dim: usize) -> usize {
    2 * dim + 40
}

/// `⟨j|S(r)|k⟩` for `j, k < dim`, with `S(r) = exp[r(b² − b†²)/2]`.
///
/// The exponential is taken on a padded space and cut back to `dim`, so the
/// returned block carries the true matrix elements rather than those of a
/// truncated generator.
///
/// The generator only couples `n ↔ n ± 2`. On each parity sector it is a real
/// antisymmetric tridiagonal `T`, and with `D = diag(iᵏ)` one has
/// `D⁻¹TD = iJ` for the symmetric tridiagonal `J` sharing its off-diagonal, so
/// `exp(T) = D Q e^{iΛ} Qᵀ D⁻¹` from the eigendecomposition `J = QΛQᵀ`.
fn squeeze_block(r: f64, dim: usize) -> DMatrix<f64> {
    let w = working_dim(dim);
    let mut out = DMatrix::<f64>::zeros(dim, dim);
    for parity in 0..2 {
        let levels: Vec<usize> = (parity..w).step_by(2).collect();
        let len = levels.len();
        let mut j = DMatrix::<f64>::zeros(len, len);
        for k in 1..len {
            let n = levels[k];
            let amp = 0.5 * r * ((n * (n - 1)) as f64).sqrt();
            j[(k - 1, k)] = amp;
            j[(k, k - 1)] = amp;
        }
        let eig = SymmetricEigen::new(j);
        let keep = levels.iter().take_while(|&&n| n < dim).count();
        let q = eig.eigenvectors.rows(0, keep);
        let mut qc = q.clone_owned();
        let mut qs = q.clone_owned();
        for (l, lambda) in eig.eigenvalues.iter().enumerate() {
            qc.column_mut(l).scale_mut(lambda.cos());
            qs.column_mut(l).scale_mut(lambda.sin());
        }
        let c = &qc * q.transpose();
        let sn = &qs * q.transpose();
        for a in 0..keep {
            for b in 0..keep {
                // Re[i^{a−b} (c + i s)]
                let v = match (a as isize - b as isize).rem_euclid(4) {
                    0 => c[(a, b)],
                    1 => -sn[(a, b)],
                    2 => -c[(a, b)],
                    _ => sn[(a, b)],
                };
                out[(levels[a], levels[b])] = v;
            }
        }
    }
    out
}

fn check_squeeze_args(r: f64, dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dim must be >= 2, got {dim}")));
    }
    if !r.is_finite() || r.abs() > MAX_SQUEEZING {
        return Err(Error::InvalidParameter(format!(
            "squeezing |r| must be <= {MAX_SQUEEZING}, got {r}"
        )));
    }
    Ok(())
}

/// `1 − Σ_j |⟨j|S|k⟩|²`: probability that `S|k⟩` leaves the retained space.
fn column_leak(s: &DMatrix<f64>, k: usize) -> f64 {
    1.0 - s.column(k).norm_squared()
}

/// Squeezing operator `S(r) = exp[r(b² − b†²)/2]` on `dim` Fock levels.
///
/// Errors with [`Error::CutoffTooSmall`] when the squeezed vacuum does not fit:
/// `1 − ‖S|0⟩‖²` on the retained levels above the cutoff tolerance.
pub fn squeeze_operator(r: f64, dim: usize) -> Result<FockOperator> {
    check_squeeze_args(r, dim)?;
    let s = squeeze_block(r, dim);
    let leak = column_leak(&s, 0);
    if leak > TOL.cutoff_deficit {
        return Err(Error::CutoffTooSmall { dim, defect: leak });
    }
    FockOperator::from_matrix(s.map(|x| C64::new(x, 0.0)))
}

fn thermal_populations(n_eff: f64, dim: usize) -> Result<Vec<f64>> {
    if !n_eff.is_finite() || n_eff < 0.0 {
        return Err(Error::InvalidParameter(format!("n_eff must be >= 0, got {n_eff}")));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dim must be positive".into()));
    }
    let q = n_eff / (1.0 + n_eff);
    let p0 = 1.0 / (1.0 + n_eff);
    let mut pops = Vec::with_capacity(dim);
    let mut p = p0;
    for _ in 0..dim {
        pops.push(p);
        p *= q;
    }
    Ok(pops)
}

/// Bose–Einstein state `ρ_nn = n̄ⁿ/(1+n̄)ⁿ⁺¹`, renormalized on `dim` levels.
pub fn thermal_state(n_eff: f64, dim: usize) -> Result<DensityMatrix> {
    let pops = thermal_populations(n_eff, dim)?;
    let deficit = 1.0 - pops.iter().sum::<f64>();
    if deficit > TOL.cutoff_deficit {
        return Err(Error::CutoffTooSmall { dim, defect: deficit });
    }
    let mut mat = DMatrix::<C64>::zeros(dim, dim);
    for (n, p) in pops.into_iter().enumerate() {
        mat[(n, n)] = C64::new(p, 0.0);
    }
    DensityMatrix::from_unnormalized(mat)
}

/// `S(r) ρ_th(n_eff) S(r)†` with quadrature variances `(n_eff + ½)e^{∓2r}`.
///
/// The cutoff check is on the trace lost by the whole construction, thermal
/// truncation included.
pub fn squeezed_thermal_state(r: f64, n_eff: f64, dim: usize) -> Result<DensityMatrix> {
    check_squeeze_args(r, dim)?;
    let pops = thermal_populations(n_eff, dim)?;
    let s = if r == 0.0 { DMatrix::identity(dim, dim) } else { squeeze_block(r, dim) };
    let kept: f64 = pops
        .iter()
        .enumerate()
        .map(|(k, p)| p * s.column(k).norm_squared())
        .sum();
    let deficit = 1.0 - kept;
    if deficit > TOL.cutoff_deficit {
        return Err(Error::CutoffTooSmall { dim, defect: deficit });
    }
    // S diag(p) Sᵀ, real since S is.
    let mut scaled = s.clone();
    for (k, p) in pops.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*p);
    }
    let rho = scaled * s.transpose();
    DensityMatrix::from_unnormalized(rho.map(|x| C64::new(x, 0.0)))
}

/// Squeezed thermal state on the first cutoff (from `min_dim`, growing
/// geometrically) whose top levels hold less than the adaptive tail target. At the
/// largest cutoff the ordinary convergence tolerance is accepted instead.
pub fn squeezed_thermal_converged(r: f64, n_eff: f64, min_dim: usize) -> Result<DensityMatrix> {
    let mut dim = min_dim.max(2);
    loop {
        let defect = match squeezed_thermal_state(r, n_eff, dim) {
            Ok(rho) => {
                let tail = rho.tail_population(TOL.tail_levels);
                if tail <= TOL.adaptive_tail || (dim >= MAX_ADAPTIVE_DIM && tail <= TOL.truncation_tail) {
                    return Ok(rho);
                }
                tail
            }
            Err(Error::CutoffTooSmall { defect, .. }) => defect,
            Err(e) => return Err(e),
        };
        if dim >= MAX_ADAPTIVE_DIM {
            return Err(Error::CutoffTooSmall { dim, defect });
        }
        dim = next_adaptive_dim(dim);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::expectation;

    #[test]
    fn zero_squeezing_is_identity() {
        let s = squeeze_operator(0.0, 20).unwrap();
        assert!((s.matrix() - DMatrix::<C64>::identity(20, 20)).camax() < 1e-15);
    }

    #[test]
    fn squeezed_vacuum_mean_number() {
        let s = squeeze_operator(1.0, 80).unwrap();
        let psi = s.matrix().column(0).into_owned();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let n = expectation(&rho, &FockOperator::number(80)).unwrap();
        assert!((n.re - 1f64.sinh().powi(2)).abs() < 1e-8, "{}", n.re);
        assert!(n.im.abs() < 1e-12);
    }

    #[test]
    fn squeezed_vacuum_has_only_even_levels() {
        let s = squeeze_operator(1.0, 80).unwrap();
        for (n, z) in s.matrix().column(0).iter().enumerate() {
            if n % 2 == 1 {
                assert!(z.norm_sqr() <= 1e-12);
            }
        }
    }

    #[test]
    fn cutoff_too_small_is_flagged() {
        assert!(matches!(squeeze_operator(1.0, 30), Err(Error::CutoffTooSmall { .. })));
        assert!(matches!(thermal_state(2.0, 10), Err(Error::CutoffTooSmall { .. })));
        assert!(matches!(
            squeezed_thermal_state(1.0, 0.5, 30),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn bad_arguments() {
        assert!(matches!(squeeze_operator(3.5, 50), Err(Error::InvalidParameter(_))));
        assert!(matches!(squeeze_operator(0.1, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(thermal_state(-0.1, 10), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn thermal_examples() {
        let vac = thermal_state(0.0, 10).unwrap();
        assert_eq!(vac, DensityMatrix::vacuum(10));
        let th = thermal_state(2.0, 200).unwrap();
        assert!((th.matrix()[(0, 0)].re - 1.0 / 3.0).abs() < 1e-12);
        assert!((th.matrix()[(1, 1)].re - 2.0 / 9.0).abs() < 1e-12);
        assert!((th.mean_number() - 2.0).abs() < 1e-9);
        let cold = thermal_state(0.02, 40).unwrap();
        assert!((cold.purity() - 1.0 / 1.04).abs() < 1e-12);
    }

    #[test]
    fn squeezed_thermal_variances() {
        let q = squeezed_thermal_state(0.5, 0.0, 80).unwrap().quadrature_moments();
        assert!((q.var_x - 0.5 * (-1f64).exp()).abs() < 1e-6);
        assert!((q.var_p - 0.5 * 1f64.exp()).abs() < 1e-6);

        let q = squeezed_thermal_state(0.0, 0.0, 10).unwrap().quadrature_moments();
        assert!((q.var_x - 0.5).abs() < 1e-14 && (q.var_p - 0.5).abs() < 1e-14);

        let q = squeezed_thermal_state(1.0, 0.02, 100).unwrap().quadrature_moments();
        assert!((q.var_x - 0.52 * (-2f64).exp()).abs() < 1e-6);
        assert!((q.var_p - 0.52 * 2f64.exp()).abs() < 1e-6);
        assert!(((q.var_x * q.var_p).sqrt() - 0.52).abs() < 1e-6);
        assert!(q.cov_xp.abs() < 1e-12);
    }

    #[test]
    fn inverse_squeeze_on_resolved_columns() {
        // S(r)S(−r) = I on the columns the cutoff actually resolves.
        let dim = 120;
        let a = squeeze_block(0.8, dim);
        let b = squeeze_block(-0.8, dim);
        let prod = &a * &b;
        let resolved: Vec<usize> =
            (0..dim).filter(|&k| column_leak(&b, k) < 1e-10).collect();
        assert!(resolved.len() >= 6, "{resolved:?}");
        for &k in &resolved {
            let tol = 1e-8 + 2.0 * column_leak(&b, k).max(0.0).sqrt();
            for j in 0..dim / 2 {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((prod[(j, k)] - want).abs() < tol, "({j},{k}) {} {tol}", prod[(j, k)]);
            }
        }
    }
}
