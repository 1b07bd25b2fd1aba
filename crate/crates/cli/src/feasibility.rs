//! Experiment-duration estimate from device parameters.

use std::f64::consts::PI;

use phonocat_core::subtraction::{event_rate, herald_squeezed_thermal, theta_from_pulse};
use phonocat_core::{Error, PulseParams, Result};
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::record::{Cell, RunRecord, Table};

const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Product of the cavity efficiency `κ_ex/κ` and further efficiency factors.
pub fn detection_efficiency(cavity_efficiency: f64, extra: &[f64]) -> Result<f64> {
    let mut eta = 1.0;
    for &f in std::iter::once(&cavity_efficiency).chain(extra) {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter(format!("efficiency factor {f} outside [0, 1]")));
        }
        eta *= f;
    }
    Ok(eta)
}

/// Bose–Einstein occupation of a mode at `freq_hz` in a bath at `t_kelvin`.
pub fn bose_einstein(freq_hz: f64, t_kelvin: f64) -> f64 {
    if t_kelvin == 0.0 {
        return 0.0;
    }
    1.0 / (PLANCK * freq_hz / (BOLTZMANN * t_kelvin)).exp_m1()
}

/// High-temperature occupation `k_B T / h f`.
pub fn classical_occupation(freq_hz: f64, t_kelvin: f64) -> f64 {
    BOLTZMANN * t_kelvin / (PLANCK * freq_hz)
}

/// Squeezing (cooling) rate `C Γ_m` as an ordinary frequency.
pub fn squeezing_rate_hz(cooperativity: f64, gamma_m_hz: f64) -> f64 {
    cooperativity * gamma_m_hz
}

/// Time for the occupation to relax from `n_th` to `n_eff` at rate `C Γ_m`.
pub fn squeezing_time(cooperativity: f64, gamma_m_hz: f64, n_th: f64, n_eff: f64) -> f64 {
    (n_th / n_eff).ln().max(0.0) / (2.0 * PI * squeezing_rate_hz(cooperativity, gamma_m_hz))
}

/// Hours needed to collect `events` heralds at `rate` per second.
pub fn hours_for(events: f64, rate: f64) -> f64 {
    events / rate / 3600.0
}

const COLUMNS: [&str; 6] = ["quantity", "r", "m", "probability", "value", "unit"];

fn scalar(t: &mut Table, name: &str, value: f64, unit: &str) {
    t.push(vec![name.into(), Cell::Null, Cell::Null, Cell::Null, value.into(), unit.into()]);
}

fn rate_rows(t: &mut Table, r: Cell, m: Cell, p: f64, period: f64, target: f64) -> Result<()> {
    let rate = event_rate(p, period)?;
    let rows = [
        ("events_per_s", rate, "1/s"),
        ("seconds_per_event", 1.0 / rate, "s"),
        ("hours_for_target_events", hours_for(target, rate), "h"),
    ];
    for (name, v, unit) in rows {
        t.push(vec![name.into(), r.clone(), m.clone(), p.into(), v.into(), unit.into()]);
    }
    Ok(())
}

pub fn run_feasibility(cfg: &SweepConfig) -> Result<RunRecord> {
    let f = &cfg.feasibility;
    let c = cfg.cooperativity[0];
    let n_eff = cfg.n_eff[0];
    let two_pi = 2.0 * PI;
    let mut t = Table::new(&COLUMNS);

    let cavity = f.kappa_ex_hz / f.kappa_hz;
    let eta = detection_efficiency(cavity, &f.extra_efficiencies)?;
    scalar(&mut t, "cavity_efficiency", cavity, "1");
    scalar(&mut t, "detection_efficiency", eta, "1");

    scalar(&mut t, "n_th", cfg.n_th, "1");
    scalar(&mut t, "n_th_bose_einstein", bose_einstein(f.omega_m_hz, f.t_bath_k), "1");
    scalar(&mut t, "n_th_classical", classical_occupation(f.omega_m_hz, f.t_bath_k), "1");
    scalar(&mut t, "thermal_decoherence_time", 1.0 / (cfg.n_th * two_pi * f.gamma_m_hz), "s");

    let g_minus_hz = (c * f.kappa_hz * f.gamma_m_hz / 4.0).sqrt();
    scalar(&mut t, "cooperativity", c, "1");
    scalar(&mut t, "squeeze_g_minus", g_minus_hz, "Hz");
    scalar(&mut t, "squeeze_drive_n_cav", (g_minus_hz / f.g0_hz).powi(2), "1");
    scalar(&mut t, "squeezing_rate", squeezing_rate_hz(c, f.gamma_m_hz), "Hz");
    scalar(&mut t, "squeezing_time", squeezing_time(c, f.gamma_m_hz, cfg.n_th, n_eff), "s");

    let pulse = PulseParams {
        g0: two_pi * f.g0_hz,
        n_cav: f.pulse_n_cav,
        kappa: two_pi * f.kappa_hz,
        t_pulse: f.pulse_duration_s,
        eta,
    };
    let theta = theta_from_pulse(&pulse)?;
    scalar(&mut t, "pulse_coupling", pulse.coupling() / two_pi, "Hz");
    scalar(&mut t, "theta", theta, "rad");
    scalar(&mut t, "reflectivity", theta.sin().powi(2), "1");

    let pairs: Vec<(f64, usize)> =
        cfg.r.values().into_iter().flat_map(|r| cfg.m.iter().map(move |&m| (r, m))).collect();
    let probs: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(r, m)| {
            herald_squeezed_thermal(r, n_eff, theta, eta, m, cfg.numerics.min_dim).map(|h| h.probability)
        })
        .collect();
    for (&(r, m), p) in pairs.iter().zip(probs) {
        rate_rows(&mut t, r.into(), m.into(), p?, f.rep_period_s, f.events_target)?;
    }
    for &p in &f.reference_probabilities {
        rate_rows(&mut t, Cell::Null, Cell::Null, p, f.rep_period_s, f.events_target)?;
    }

    let mut rec = RunRecord::new(cfg, t);
    rec.assumptions.push("rep_period_s is the time per heralding attempt".into());
    rec.assumptions.push(format!(
        "probabilities use theta from the pulse settings and n_eff = {n_eff}; n_th = {} as configured",
        cfg.n_th
    ));
    Ok(rec)
}
