use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use phonocat_core::fock::MAX_SQUEEZING;
use phonocat_core::measures::ReportOptions;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Purity,
    Nonclassicality,
    Losses,
    State,
    Feasibility,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Purity => "purity",
            Mode::Nonclassicality => "nonclassicality",
            Mode::Losses => "losses",
            Mode::State => "state",
            Mode::Feasibility => "feasibility",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WignerFormat {
    Csv,
    Binary,
}

/// Either an explicit list or `num` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Range {
    List(Vec<f64>),
    Linspace { start: f64, stop: f64, num: usize },
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Range::List(ref v) => v.clone(),
            Range::Linspace { start, stop, num } => match num {
                0 => vec![],
                1 => vec![start],
                _ => (0..num)
                    .map(|i| start + (stop - start) * i as f64 / (num - 1) as f64)
                    .collect(),
            },
        }
    }

    /// `a,b,c` or `start:stop:num`.
    pub fn parse(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("expected start:stop:num, got '{s}'"));
            }
            let start = parse_f64(parts[0])?;
            let stop = parse_f64(parts[1])?;
            let num = parts[2].trim().parse().map_err(|_| format!("bad count '{}'", parts[2]))?;
            Ok(Range::Linspace { start, stop, num })
        } else {
            parse_list(s).map(Range::List)
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse().map_err(|_| format!("bad number '{s}'"))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_f64).collect()
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad integer '{t}'")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaForM {
    pub m: usize,
    pub theta: f64,
}

/// One parameter tuple of the subtraction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub r: f64,
    pub n_eff: f64,
    pub theta: f64,
    pub eta: f64,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingPoint {
    pub r: f64,
    pub cooperativity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bisection {
    pub c_min: f64,
    pub c_max: f64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Starting mechanical cutoff; grown automatically until converged.
    pub min_dim: usize,
    /// Coarse Wigner grid points per axis (the fine grid has `2n − 1`).
    pub grid_points: usize,
    pub max_enlargements: usize,
}

impl Numerics {
    pub fn report_options(&self) -> ReportOptions {
        ReportOptions { grid_points: self.grid_points, max_enlargements: self.max_enlargements }
    }
}

/// Device and budget settings for the feasibility estimate. Frequencies are
/// ordinary frequencies in Hz (the angular rate divided by 2π).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Feasibility {
    pub omega_m_hz: f64,
    pub gamma_m_hz: f64,
    pub kappa_hz: f64,
    pub kappa_ex_hz: f64,
    pub t_bath_k: f64,
    pub g0_hz: f64,
    /// Mean intracavity photons during the subtraction pulse.
    pub pulse_n_cav: f64,
    pub pulse_duration_s: f64,
    /// Efficiencies multiplied with `κ_ex/κ` to give η.
    pub extra_efficiencies: Vec<f64>,
    /// Time per heralding attempt.
    pub rep_period_s: f64,
    /// Probabilities converted to event rates alongside the computed ones.
    pub reference_probabilities: Vec<f64>,
    pub events_target: f64,
}

impl Default for Feasibility {
    fn default() -> Self {
        Self {
            omega_m_hz: 5.2e9,
            gamma_m_hz: 100e3,
            kappa_hz: 1e9,
            kappa_ex_hz: 800e6,
            t_bath_k: 0.5,
            g0_hz: 1e6,
            pulse_n_cav: 40.0,
            pulse_duration_s: 10e-9,
            extra_efficiencies: vec![1.0, 0.25],
            rep_period_s: 10e-6,
            reference_probabilities: vec![1e-4, 1e-7],
            events_target: 100.0,
        }
    }
}

/// Full description of one run. Every field has a mode-dependent default
/// (see [`SweepConfig::defaults`]); a config file overrides any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub mode: Mode,
    pub r: Range,
    pub cooperativity: Vec<f64>,
    /// Target occupations for the cooperativity contours.
    pub n_eff_targets: Vec<f64>,
    pub working_points: Vec<WorkingPoint>,
    pub n_eff: Vec<f64>,
    /// Beamsplitter angle for every `m`; when absent `theta_by_m` is used.
    pub theta: Option<f64>,
    pub theta_by_m: Vec<ThetaForM>,
    pub eta: Range,
    pub m: Vec<usize>,
    pub n_th: f64,
    pub kappa_over_gamma: f64,
    pub bisection: Bisection,
    pub numerics: Numerics,
    /// Points whose Wigner grid and state are written next to the table.
    pub dumps: Vec<Point>,
    pub wigner_format: WignerFormat,
    pub feasibility: Feasibility,
    /// Output directory; the table goes to stdout when absent.
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// θ for m = 3 is not stated for the loss figure; see [`LOSS_THETA_NOTE`].
pub const LOSS_THETAS: [ThetaForM; 3] = [
    ThetaForM { m: 1, theta: 0.05 },
    ThetaForM { m: 2, theta: 0.1 },
    ThetaForM { m: 3, theta: 0.2 },
];

pub const LOSS_THETA_NOTE: &str = "theta for m=3 (0.2) is assumed: it continues the 0.05, 0.1 progression and \
     reproduces heralding probabilities down to 1e-7 at r=0.5, eta=0.2";

impl SweepConfig {
    pub fn defaults(mode: Mode) -> Self {
        let mut cfg = Self {
            schema_version: SCHEMA_VERSION,
            mode,
            r: Range::Linspace { start: 0.1, stop: 1.5, num: 15 },
            cooperativity: vec![50.0, 200.0, 1000.0],
            n_eff_targets: vec![0.02],
            working_points: vec![
                WorkingPoint { r: 0.5, cooperativity: 200.0 },
                WorkingPoint { r: 1.0, cooperativity: 1000.0 },
            ],
            n_eff: vec![0.0, 0.02, 0.1],
            theta: Some(0.1),
            theta_by_m: vec![],
            eta: Range::List(vec![1.0]),
            m: vec![1, 2, 3],
            n_th: 2.0,
            kappa_over_gamma: 1e6,
            bisection: Bisection { c_min: 1.0, c_max: 1e5, rel_tol: 1e-3 },
            numerics: Numerics { min_dim: 40, grid_points: 512, max_enlargements: 4 },
            dumps: vec![],
            wigner_format: WignerFormat::Csv,
            feasibility: Feasibility::default(),
            output: None,
            format: OutputFormat::Csv,
        };
        match mode {
            Mode::Purity => {
                cfg.r = Range::Linspace { start: 0.0, stop: 1.5, num: 31 };
            }
            Mode::Nonclassicality => {
                cfg.dumps = (1..=3)
                    .map(|m| Point { r: 1.0, n_eff: 0.02, theta: 0.1, eta: 1.0, m })
                    .collect();
            }
            Mode::Losses => {
                cfg.r = Range::List(vec![0.5, 1.0]);
                cfg.n_eff = vec![0.02];
                cfg.theta = None;
                cfg.theta_by_m = LOSS_THETAS.to_vec();
                cfg.eta = Range::Linspace { start: 0.05, stop: 1.0, num: 20 };
                cfg.dumps = [(0.5, 1), (0.5, 2), (1.0, 1), (1.0, 2)]
                    .iter()
                    .map(|&(r, m)| Point { r, n_eff: 0.02, theta: LOSS_THETAS[m - 1].theta, eta: 0.2, m })
                    .collect();
            }
            Mode::State => {
                cfg.r = Range::List(vec![1.0]);
                cfg.n_eff = vec![0.02];
                cfg.m = vec![2];
            }
            Mode::Feasibility => {
                cfg.r = Range::List(vec![0.5, 1.0]);
                cfg.n_eff = vec![0.02];
                cfg.cooperativity = vec![200.0];
                cfg.theta = None;
            }
        }
        cfg
    }

    /// Reads a JSON config, filling absent fields from the defaults of `mode`.
    pub fn load(path: &Path, mode: Mode) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, mode)
    }

    pub fn from_json(text: &str, mode: Mode) -> Result<Self, CliError> {
        let file: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        let Value::Object(fields) = file else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        let mut merged = serde_json::to_value(Self::defaults(mode)).expect("config serializes");
        let target = merged.as_object_mut().expect("config is an object");
        for (k, v) in fields {
            target.insert(k, v);
        }
        let cfg: Self = serde_json::from_value(merged).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.mode != mode {
            return Err(CliError::Config(format!(
                "config mode '{}' does not match subcommand '{}'",
                cfg.mode.name(),
                mode.name()
            )));
        }
        Ok(cfg)
    }

    pub fn theta_for(&self, m: usize) -> Result<f64, CliError> {
        if let Some(t) = self.theta {
            return Ok(t);
        }
        self.theta_by_m
            .iter()
            .find(|t| t.m == m)
            .map(|t| t.theta)
            .ok_or_else(|| CliError::Config(format!("no theta given for m = {m}")))
    }

    /// Whether θ for some swept `m` comes from the assumed loss-figure value.
    pub fn uses_assumed_theta(&self) -> bool {
        self.theta.is_none()
            && self.m.contains(&3)
            && self.theta_by_m.iter().any(|t| *t == LOSS_THETAS[2])
    }

    /// Checks every range against the validity regime of the module it feeds.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if let Range::Linspace { num: 0, .. } = self.r {
            return bad("r linspace needs num >= 1".into());
        }
        if let Range::Linspace { num: 0, .. } = self.eta {
            return bad("eta linspace needs num >= 1".into());
        }
        for r in self.r.values() {
            if !(0.0..=MAX_SQUEEZING).contains(&r) {
                return bad(format!("r = {r} outside [0, {MAX_SQUEEZING}]"));
            }
        }
        for eta in self.eta.values() {
            if !(0.0..=1.0).contains(&eta) {
                return bad(format!("eta = {eta} outside [0, 1]"));
            }
        }
        for &n in self.n_eff.iter().chain(&self.n_eff_targets) {
            if !n.is_finite() || n < 0.0 {
                return bad(format!("n_eff = {n} must be >= 0"));
            }
        }
        for &c in self.cooperativity.iter().chain(self.working_points.iter().map(|w| &w.cooperativity)) {
            if !(c > 0.0) || !c.is_finite() {
                return bad(format!("cooperativity {c} must be positive"));
            }
        }
        if !self.n_th.is_finite() || self.n_th < 0.0 {
            return bad(format!("n_th = {} must be >= 0", self.n_th));
        }
        if !(self.kappa_over_gamma > 0.0) || !self.kappa_over_gamma.is_finite() {
            return bad("kappa_over_gamma must be positive".into());
        }
        let b = &self.bisection;
        if !(b.c_min > 0.0 && b.c_min < b.c_max && b.rel_tol > 0.0) {
            return bad("bisection needs 0 < c_min < c_max and rel_tol > 0".into());
        }
        for &m in &self.m {
            if m > 10 {
                return bad(format!("m = {m} exceeds 10"));
            }
        }
        let thetas = self.theta.iter().copied().chain(self.theta_by_m.iter().map(|t| t.theta));
        for t in thetas.chain(self.dumps.iter().map(|p| p.theta)) {
            if !(0.0..FRAC_PI_2).contains(&t) {
                return bad(format!("theta = {t} outside [0, pi/2)"));
            }
        }
        if matches!(self.mode, Mode::Nonclassicality | Mode::Losses | Mode::State) {
            for &m in &self.m {
                self.theta_for(m)?;
            }
        }
        for p in &self.dumps {
            if !(0.0..=MAX_SQUEEZING).contains(&p.r) || p.n_eff < 0.0 || !(0.0..=1.0).contains(&p.eta) {
                return bad(format!("dump point {p:?} outside the valid ranges"));
            }
        }
        let n = &self.numerics;
        if n.min_dim < 2 || n.grid_points < 5 {
            return bad("numerics need min_dim >= 2 and grid_points >= 5".into());
        }
        if self.mode == Mode::State {
            if self.r.values().len() != 1 || self.n_eff.len() != 1 || self.m.len() != 1 || self.eta.values().len() != 1 {
                return bad("state mode needs exactly one value of r, n_eff, eta and m".into());
            }
            if self.output.is_none() {
                return bad("state mode needs an output directory".into());
            }
        }
        if self.mode == Mode::Feasibility {
            self.validate_feasibility()?;
        }
        Ok(())
    }

    fn validate_feasibility(&self) -> Result<(), CliError> {
        let f = &self.feasibility;
        let bad = |msg: String| Err(CliError::Config(msg));
        let positive = [
            ("omega_m_hz", f.omega_m_hz),
            ("gamma_m_hz", f.gamma_m_hz),
            ("kappa_hz", f.kappa_hz),
            ("kappa_ex_hz", f.kappa_ex_hz),
            ("g0_hz", f.g0_hz),
            ("rep_period_s", f.rep_period_s),
            ("events_target", f.events_target),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive"));
            }
        }
        if f.t_bath_k < 0.0 || f.pulse_n_cav < 0.0 || f.pulse_duration_s < 0.0 {
            return bad("t_bath_k, pulse_n_cav and pulse_duration_s must be >= 0".into());
        }
        let eta = crate::feasibility::detection_efficiency(f.kappa_ex_hz / f.kappa_hz, &f.extra_efficiencies);
        if let Err(e) = eta {
            return bad(e.to_string());
        }
        for &p in &f.reference_probabilities {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("reference probability {p} outside [0, 1]"));
            }
        }
        if self.n_eff.len() != 1 || self.cooperativity.len() != 1 {
            return bad("feasibility needs exactly one n_eff and one cooperativity".into());
        }
        Ok(())
    }
}
