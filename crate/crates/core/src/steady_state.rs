//! Steady state of two-tone (upper + lower sideband) dissipative squeezing.
//!
//! In the rotating-wave, linearized picture the drives give
//! `H = g₋(a†b + ab†) + g₊(a†b† + ab)`; the cavity decays at κ into vacuum and the
//! mechanics at Γ_m into a bath of occupancy `n_th`. For quadratures ordered
//! `(X_a, P_a, X₁, X₂)` the Langevin system is `dv/dt = A v + noise`, and the
//! stationary covariance solves `A V + V Aᵀ + D = 0`.
//!
//! The cavity couples to the Bogoliubov mode `cosh r b + sinh r b†` with
//! `tanh r = g₊/g₋`, so the mechanics settles into a squeezed thermal state with
//! `X₁` squeezed.

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::fock::C64;
use crate::tolerances::TOL;

/// Drive and decay rates in any consistent unit of angular frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeDriveParams {
    pub g_minus: f64,
    pub g_plus: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub n_th: f64,
}

impl SqueezeDriveParams {
    /// Rates in units of Γ_m for squeezing `r` and cooperativity `C = 4g₋²/(κΓ_m)`.
    pub fn from_squeezing(r: f64, cooperativity: f64, n_th: f64, kappa_over_gamma: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("r must be >= 0, got {r}")));
        }
        if !(cooperativity > 0.0) || !cooperativity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cooperativity must be > 0, got {cooperativity}"
            )));
        }
        if !(kappa_over_gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa/gamma must be > 0, got {kappa_over_gamma}"
            )));
        }
        let gamma_m = 1.0;
        let kappa = kappa_over_gamma;
        let g_minus = 0.5 * (cooperativity * kappa * gamma_m).sqrt();
        let p = Self { g_minus, g_plus: g_minus * r.tanh(), kappa, gamma_m, n_th };
        p.validate()?;
        Ok(p)
    }

    pub fn cooperativity(&self) -> f64 {
        4.0 * self.g_minus * self.g_minus / (self.kappa * self.gamma_m)
    }

    /// Largest cooperativity compatible with the weak-coupling bound at this κ/Γ_m.
    pub fn max_cooperativity(kappa_over_gamma: f64) -> f64 {
        4.0 * TOL.weak_coupling * TOL.weak_coupling * kappa_over_gamma
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.g_minus, self.g_plus, self.kappa, self.gamma_m, self.n_th];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite drive parameter".into()));
        }
        if !(self.kappa > 0.0) || !(self.gamma_m > 0.0) {
            return Err(Error::InvalidParameter("kappa and gamma_m must be positive".into()));
        }
        if self.n_th < 0.0 {
            return Err(Error::InvalidParameter(format!("n_th must be >= 0, got {}", self.n_th)));
        }
        let undriven = self.g_minus == 0.0 && self.g_plus == 0.0;
        if !undriven && !(self.g_plus >= 0.0 && self.g_plus < self.g_minus) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= g_plus < g_minus, got g_plus={}, g_minus={}",
                self.g_plus, self.g_minus
            )));
        }
        if self.g_minus > TOL.weak_coupling * self.kappa {
            return Err(Error::RegimeViolation(format!(
                "g_minus/kappa = {:.4} exceeds {}",
                self.g_minus / self.kappa,
                TOL.weak_coupling
            )));
        }
        Ok(())
    }
}

/// Symmetric 4×4 covariance over `(X_a, P_a, X₁, X₂)`, vacuum variance 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    /// Validates symmetry and the uncertainty relation `V + (i/2)Ω ≥ 0`.
    pub fn new(v: Matrix4<f64>) -> Result<Self> {
        let asym = (v - v.transpose()).amax();
        if asym > TOL.covariance_symmetry * v.amax().max(1.0) {
            return Err(Error::InvalidState(format!("covariance asymmetry {asym:.3e}")));
        }
        let lo = heisenberg_min_eigenvalue(&v);
        if lo < -TOL.heisenberg {
            return Err(Error::InvalidState(format!("uncertainty relation violated ({lo:.3e})")));
        }
        Ok(Self(v))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn var_x1(&self) -> f64 {
        self.0[(2, 2)]
    }

    pub fn var_x2(&self) -> f64 {
        self.0[(3, 3)]
    }

    pub fn mechanical_block(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    /// `√(⟨ΔX₁²⟩⟨ΔX₂²⟩) − ½`.
    pub fn n_eff(&self) -> f64 {
        (self.var_x1() * self.var_x2()).sqrt() - 0.5
    }

    /// `¼ ln(⟨ΔX₂²⟩/⟨ΔX₁²⟩)`.
    pub fn squeezing_parameter(&self) -> f64 {
        0.25 * (self.var_x2() / self.var_x1()).ln()
    }
}

fn heisenberg_min_eigenvalue(v: &Matrix4<f64>) -> f64 {
    let mut h = DMatrix::<C64>::from_fn(4, 4, |i, j| C64::new(v[(i, j)], 0.0));
    for blk in [0, 2] {
        h[(blk, blk + 1)] += C64::new(0.0, 0.5);
        h[(blk + 1, blk)] -= C64::new(0.0, 0.5);
    }
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Drift `A` and diffusion `D` of the quadrature Langevin equations.
pub fn drift_and_diffusion(p: &SqueezeDriveParams) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    p.validate()?;
    let k2 = 0.5 * p.kappa;
    let g2 = 0.5 * p.gamma_m;
    let diff = p.g_minus - p.g_plus;
    let sum = p.g_minus + p.g_plus;
    #[rustfmt::skip]
    let a = Matrix4::new(
        -k2,  0.0,  0.0,  diff,
        0.0, -k2,  -sum,  0.0,
        0.0,  diff, -g2,  0.0,
        -sum, 0.0,  0.0, -g2,
    );
    let dm = p.gamma_m * (p.n_th + 0.5);
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(k2, k2, dm, dm));

    let max_re = a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(Error::Unstable { max_real_part: max_re });
    }
    Ok((a, d))
}

/// Solves `A V + V Aᵀ + D = 0` by vectorizing to a 16×16 linear system.
pub fn solve_lyapunov(a: &Matrix4<f64>, d: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let ad = DMatrix::from_column_slice(4, 4, a.as_slice());
    let id = DMatrix::<f64>::identity(4, 4);
    let sys = id.kronecker(&ad) + ad.kronecker(&id);
    let rhs = -DMatrix::from_column_slice(16, 1, d.as_slice());
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Lyapunov("singular Lyapunov operator".into()))?;
    let v = Matrix4::from_column_slice(sol.as_slice());
    let v = 0.5 * (v + v.transpose());
    let residual = (a * v + v * a.transpose() + d).norm();
    if residual > TOL.lyapunov_residual * d.norm() {
        return Err(Error::Lyapunov(format!("residual {residual:.3e}")));
    }
    Ok(v)
}

/// Stationary covariance of the driven cavity + mechanics.
pub fn solve_steady_covariance(p: &SqueezeDriveParams) -> Result<CovarianceMatrix> {
    let (a, d) = drift_and_diffusion(p)?;
    CovarianceMatrix::new(solve_lyapunov(&a, &d)?)
}

/// Steady-state `n_eff` for squeezing `r` (via `g₊/g₋ = tanh r`) at cooperativity `C`.
pub fn purity_tradeoff(r: f64, cooperativity: f64, n_th: f64, kappa_over_gamma: f64) -> Result<f64> {
    let p = SqueezeDriveParams::from_squeezing(r, cooperativity, n_th, kappa_over_gamma)?;
    Ok(solve_steady_covariance(&p)?.n_eff())
}

/// Smallest cooperativity reaching `target` n_eff at squeezing `r`, by bisection in
/// `ln C` over `[lo, hi]` (upper end clipped to the weak-coupling limit).
pub fn cooperativity_for_purity(
    r: f64,
    target: f64,
    n_th: f64,
    kappa_over_gamma: f64,
    bracket: (f64, f64),
    rel_tol: f64,
) -> Result<f64> {
    let (mut lo, hi) = bracket;
    let mut hi = hi.min(SqueezeDriveParams::max_cooperativity(kappa_over_gamma) * (1.0 - 1e-9));
    if !(lo > 0.0 && lo < hi) || !(rel_tol > 0.0) || !(target > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bad bisection setup: bracket [{lo}, {hi}], rel_tol {rel_tol}, target {target}"
        )));
    }
    let f = |c: f64| purity_tradeoff(r, c, n_th, kappa_over_gamma).map(|n| n - target);
    if f(hi)? > 0.0 {
        return Err(Error::RegimeViolation(format!(
            "n_eff = {target} unreachable for r = {r} below C = {hi:.4e}"
        )));
    }
    if f(lo)? <= 0.0 {
        return Ok(lo);
    }
    while hi / lo - 1.0 > rel_tol {
        let mid = (lo * hi).sqrt();
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g_minus: f64, g_plus: f64) -> SqueezeDriveParams {
        SqueezeDriveParams { g_minus, g_plus, kappa: 1e4, gamma_m: 1.0, n_th: 2.0 }
    }

    #[test]
    fn undriven_mechanics_is_thermal() {
        let v = solve_steady_covariance(&params(0.0, 0.0)).unwrap();
        let (a, _) = drift_and_diffusion(&params(0.0, 0.0)).unwrap();
        assert_eq!(a.fixed_view::<2, 2>(0, 2).amax(), 0.0);
        assert!((v.var_x1() - 2.5).abs() < 1e-12 && (v.var_x2() - 2.5).abs() < 1e-12);
        assert!((v.matrix()[(0, 0)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn diffusion_is_symmetric_psd() {
        let (_, d) = drift_and_diffusion(&params(300.0, 200.0)).unwrap();
        assert_eq!(d, d.transpose());
        assert!(d.symmetric_eigenvalues().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn adiabatic_elimination_gives_sideband_cooling_rate() {
        // Eliminating the cavity: A_mm − A_mc A_cc⁻¹ A_cm = −Γ_eff/2 · I.
        let p = params(100.0, 0.0);
        let (a, _) = drift_and_diffusion(&p).unwrap();
        let acc = a.fixed_view::<2, 2>(0, 0).into_owned();
        let acm = a.fixed_view::<2, 2>(0, 2).into_owned();
        let amc = a.fixed_view::<2, 2>(2, 0).into_owned();
        let amm = a.fixed_view::<2, 2>(2, 2).into_owned();
        let eff = amm - amc * acc.try_inverse().unwrap() * acm;
        let gamma_eff = p.gamma_m + 4.0 * p.g_minus * p.g_minus / p.kappa;
        assert!((eff[(0, 0)] + 0.5 * gamma_eff).abs() < 1e-12);
        assert!((eff[(1, 1)] + 0.5 * gamma_eff).abs() < 1e-12);
        assert!(eff[(0, 1)].abs() < 1e-12 && eff[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn strong_cooling_reaches_ground_state() {
        let n = purity_tradeoff(0.0, 4e4, 2.0, 1e6).unwrap();
        assert!(n < 1e-4, "{n}");
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(matches!(params(100.0, 100.0).validate(), Err(Error::InvalidParameter(_))));
        assert!(matches!(params(2000.0, 0.0).validate(), Err(Error::RegimeViolation(_))));
        assert!(matches!(
            purity_tradeoff(1.0, 1000.0, 2.0, 1e4),
            Err(Error::RegimeViolation(_))
        ));
        assert!(matches!(purity_tradeoff(-0.1, 10.0, 2.0, 1e6), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn unstable_drift_is_reported() {
        // Bypass validation to probe the stability check: g₊ > g₋ is parametric gain.
        let p = SqueezeDriveParams { g_minus: 10.0, g_plus: 80.0, kappa: 1e4, gamma_m: 1.0, n_th: 0.0 };
        let k2 = 0.5 * p.kappa;
        let (diff, sum) = (p.g_minus - p.g_plus, p.g_minus + p.g_plus);
        #[rustfmt::skip]
        let a = Matrix4::new(-k2, 0.0, 0.0, diff, 0.0, -k2, -sum, 0.0, 0.0, diff, -0.5, 0.0, -sum, 0.0, 0.0, -0.5);
        let max_re = a.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_re > 0.0);
        assert!(drift_and_diffusion(&p).is_err());
    }
}
