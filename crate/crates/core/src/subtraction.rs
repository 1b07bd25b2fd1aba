//! Heralded phonon subtraction.
//!
//! A weak lower-sideband pulse swaps phonons into the output temporal mode of the
//! cavity as a beamsplitter with `cos θ = e^{−g̃t}`, `g̃ = 2g²/κ`:
//!
//! ```text
//! A_out = cos θ · A_in + i sin θ · b(0)
//! b(t)  = i sin θ · A_in + cos θ · b(0)
//! ```
//!
//! With the optical input in vacuum, counting `m` photons after a detector of
//! efficiency η leaves the mechanics in
//!
//! ```text
//! ρ⁽ᵐ⁾ ∝ Σ_{n≥m} C(n,m) ηᵐ (1−η)ⁿ⁻ᵐ M_n ρ M_n†,   M_n = sinⁿθ cos^{b†b}θ bⁿ / √n!
//! ```
//!
//! The phases `e^{−i(m−n)π/2}` and `(−1)^{m+n}` of the joint output state cancel
//! in the number-diagonal optical blocks, so `M_n` is taken real and positive.
//! Loss is binomial thinning of the emitted photons (a pure-loss beamsplitter in
//! front of an ideal number-resolving detector); dark counts and decoherence of
//! the mechanics during the pulse are not modelled.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{squeezed_thermal_converged, DensityMatrix, TwoModeState, C64};
use crate::special::{ln_binomial, ln_factorials, pow_u};
use crate::tolerances::{next_adaptive_dim, DEFAULT_OPTICAL_DIM, MAX_ADAPTIVE_DIM, TOL};

/// Settings of the subtraction pulse. Rates in rad/s, time in s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    /// Single-photon optomechanical coupling `g₀`.
    pub g0: f64,
    /// Mean intracavity photon number of the pulse drive.
    pub n_cav: f64,
    pub kappa: f64,
    pub t_pulse: f64,
    /// Total detection efficiency.
    pub eta: f64,
}

impl PulseParams {
    /// Enhanced coupling `g = g₀ √n_cav`.
    pub fn coupling(&self) -> f64 {
        self.g0 * self.n_cav.sqrt()
    }

    /// `g̃ = 2g²/κ`.
    pub fn interaction_strength(&self) -> f64 {
        let g = self.coupling();
        2.0 * g * g / self.kappa
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.g0, self.n_cav, self.kappa, self.t_pulse, self.eta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite pulse parameter".into()));
        }
        if !(self.kappa > 0.0) || self.g0 < 0.0 || self.n_cav < 0.0 || self.t_pulse < 0.0 {
            return Err(Error::InvalidParameter(
                "kappa must be positive; g0, n_cav, t_pulse non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if self.coupling() > TOL.weak_coupling * self.kappa {
            return Err(Error::RegimeViolation(format!(
                "g/kappa = {:.4} exceeds {}",
                self.coupling() / self.kappa,
                TOL.weak_coupling
            )));
        }
        // t = 0 is the trivial "no pulse" point.
        if self.t_pulse > 0.0 && self.t_pulse * self.kappa < TOL.pulse_kappa_t {
            return Err(Error::RegimeViolation(format!(
                "kappa * t_pulse = {:.3} is below {}",
                self.t_pulse * self.kappa,
                TOL.pulse_kappa_t
            )));
        }
        Ok(())
    }
}

/// `θ = arccos(e^{−g̃ t})`.
pub fn theta_from_pulse(p: &PulseParams) -> Result<f64> {
    p.validate()?;
    Ok((-p.interaction_strength() * p.t_pulse).exp().acos())
}

/// Mechanical state after `m` clicks, with the probability of that outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedResult {
    pub state: DensityMatrix,
    pub probability: f64,
    pub m: usize,
    pub theta: f64,
    pub eta: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta must lie in [0, pi/2), got {theta}")));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

fn finish(out: DMatrix<C64>, m: usize, theta: f64, eta: f64) -> Result<HeraldedResult> {
    let probability = out.trace().re;
    if !(probability > TOL.zero_probability) {
        return Err(Error::ZeroProbability { probability });
    }
    Ok(HeraldedResult { state: DensityMatrix::from_unnormalized(out)?, probability, m, theta, eta })
}

/// Conditions `rho` on `m` detected photons after a beamsplitter of angle `theta`
/// and detection efficiency `eta`.
pub fn herald(rho: &DensityMatrix, theta: f64, eta: f64, m: usize) -> Result<HeraldedResult> {
    check_theta(theta)?;
    check_eta(eta)?;
    let d = rho.dim();
    let lf = ln_factorials(2 * d);
    let (s2, c) = (theta.sin().powi(2), theta.cos());
    let cos_pow: Vec<f64> = (0..2 * d).map(|k| pow_u(c, k)).collect();
    let src = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(d, d);

    let last = if eta == 1.0 { m.min(d.saturating_sub(1)) } else { d - 1 };
    for n in m..=last {
        if n >= d {
            break;
        }
        let click = ln_binomial(&lf, n, m).exp() * pow_u(eta, m) * pow_u(1.0 - eta, n - m);
        let weight = click * pow_u(s2, n);
        if weight == 0.0 {
            continue;
        }
        let amp: Vec<f64> = (0..d - n).map(|a| (0.5 * ln_binomial(&lf, a + n, n)).exp()).collect();
        for a in 0..d - n {
            for b in 0..d - n {
                let k = weight * cos_pow[a + b] * amp[a] * amp[b];
                out[(a, b)] += src[(a + n, b + n)] * k;
            }
        }
    }
    finish(out, m, theta, eta)
}

/// Heralds a squeezed thermal input, growing the cutoff from `min_dim` until
/// both input and output have negligible top-level populations (same targets
/// as [`squeezed_thermal_converged`]).
pub fn herald_squeezed_thermal(
    r: f64,
    n_eff: f64,
    theta: f64,
    eta: f64,
    m: usize,
    min_dim: usize,
) -> Result<HeraldedResult> {
    let mut dim = min_dim;
    loop {
        let input = squeezed_thermal_converged(r, n_eff, dim)?;
        let out = herald(&input, theta, eta, m)?;
        let tail = out.state.tail_population(TOL.tail_levels);
        let at_cap = input.dim() >= MAX_ADAPTIVE_DIM;
        if tail <= TOL.adaptive_tail || (at_cap && tail <= TOL.truncation_tail) {
            return Ok(out);
        }
        if at_cap {
            return Err(Error::CutoffTooSmall { dim: input.dim(), defect: tail });
        }
        dim = next_adaptive_dim(input.dim());
    }
}

/// `P(m)` for every `m < m_count`, from the populations alone: each phonon is
/// independently emitted and detected with probability `η sin²θ`.
pub fn click_distribution(rho: &DensityMatrix, theta: f64, eta: f64, m_count: usize) -> Result<Vec<f64>> {
    check_theta(theta)?;
    check_eta(eta)?;
    let p = eta * theta.sin().powi(2);
    let lf = ln_factorials(rho.dim());
    let pops = rho.populations();
    Ok((0..m_count)
        .map(|m| {
            pops.iter()
                .enumerate()
                .skip(m)
                .map(|(n, &pn)| pn * ln_binomial(&lf, n, m).exp() * pow_u(p, m) * pow_u(1.0 - p, n - m))
                .sum()
        })
        .collect())
}

/// Joint mechanics ⊗ optics state after the swap, with the optical mode starting
/// in vacuum and truncated to `dim_o` levels.
///
/// Built sector by sector: `a†b + ab†` conserves the total quantum number `N`, so
/// `U = exp[iθ(a†b + ab†)]` is exponentiated exactly on each `(N+1)`-dimensional
/// sector before projecting onto the retained optical levels.
pub fn beamsplitter_two_mode(rho_m: &DensityMatrix, theta: f64, dim_o: usize) -> Result<TwoModeState> {
    check_theta(theta)?;
    if dim_o == 0 {
        return Err(Error::InvalidParameter("dim_o must be positive".into()));
    }
    let dm = rho_m.dim();
    let pops = rho_m.populations();
    let mut iso = DMatrix::<C64>::zeros(dm * dim_o, dm);
    let mut tail = 0.0;
    for total in 0..dm {
        // basis |total − k⟩_m |k⟩_o, k = 0..=total
        let gen = DMatrix::<f64>::from_fn(total + 1, total + 1, |i, j| {
            let (lo, hi) = (i.min(j), i.max(j));
            if hi == lo + 1 {
                (((total - lo) * (lo + 1)) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(gen);
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, theta * l)));
        let vecs = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let u = &vecs * phases * vecs.transpose();

        let defect = (u.adjoint() * &u - DMatrix::<C64>::identity(total + 1, total + 1)).camax();
        if defect > TOL.unitarity {
            return Err(Error::InvalidState(format!("sector {total} unitarity defect {defect:.3e}")));
        }
        for k in 0..=total {
            let amp = u[(k, 0)];
            if k < dim_o {
                iso[((total - k) * dim_o + k, total)] = amp;
            } else {
                tail += pops[total] * amp.norm_sqr();
            }
        }
    }
    if tail > TOL.truncation_tail {
        return Err(Error::Truncation { tail });
    }
    let out = &iso * rho_m.matrix() * iso.adjoint();
    TwoModeState::from_unnormalized(dm, dim_o, out)
}

/// Where the brute-force path removes optical coherences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dephasing {
    #[default]
    None,
    BeforeLoss,
    AfterLoss,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub dim_o: usize,
    pub dephasing: Dephasing,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { dim_o: DEFAULT_OPTICAL_DIM, dephasing: Dephasing::None }
    }
}

/// Same result as [`herald`], computed on the joint space: beamsplitter, optical
/// loss, projection onto `|m⟩_o`, partial trace.
pub fn herald_oracle(rho: &DensityMatrix, theta: f64, eta: f64, m: usize) -> Result<HeraldedResult> {
    herald_oracle_with(rho, theta, eta, m, OracleOptions::default())
}

pub fn herald_oracle_with(
    rho: &DensityMatrix,
    theta: f64,
    eta: f64,
    m: usize,
    opts: OracleOptions,
) -> Result<HeraldedResult> {
    check_eta(eta)?;
    if m >= opts.dim_o {
        return Err(Error::InvalidParameter(format!(
            "m = {m} needs an optical cutoff above {}",
            opts.dim_o
        )));
    }
    let mut joint = beamsplitter_two_mode(rho, theta, opts.dim_o)?;
    if opts.dephasing == Dephasing::BeforeLoss {
        joint = joint.dephased_optical();
    }
    joint = joint.with_optical_loss(eta)?;
    if opts.dephasing == Dephasing::AfterLoss {
        joint = joint.dephased_optical();
    }
    finish(joint.optical_block(m)?, m, theta, eta)
}

/// Heralded events per second for success probability `prob` per repetition period.
pub fn event_rate(prob: f64, rep_period: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidParameter(format!("probability must lie in [0, 1], got {prob}")));
    }
    if !(rep_period > 0.0) || !rep_period.is_finite() {
        return Err(Error::InvalidParameter(format!("repetition period must be > 0, got {rep_period}")));
    }
    Ok(prob / rep_period)
}
