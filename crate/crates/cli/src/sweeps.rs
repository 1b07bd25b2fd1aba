use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use phonocat_core::measures::{fitted_grid, report_on};
use phonocat_core::steady_state::{cooperativity_for_purity, purity_tradeoff};
use phonocat_core::subtraction::herald_squeezed_thermal;
use phonocat_core::{HeraldedResult, NonclassicalityReport, Result};
use rayon::prelude::*;

use crate::config::{Numerics, Point, SweepConfig, WignerFormat, LOSS_THETA_NOTE};
use crate::error::{is_numerical_failure, CliError};
use crate::record::{Cell, Dump, RunRecord, Table};

/// Heralded state at `p` and its nonclassicality; either part may fail.
#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub point: Point,
    pub herald: Result<HeraldedResult>,
    pub report: Option<Result<NonclassicalityReport>>,
}

impl PointOutcome {
    pub fn error(&self) -> Option<&phonocat_core::Error> {
        match (&self.herald, &self.report) {
            (Err(e), _) | (_, Some(Err(e))) => Some(e),
            _ => None,
        }
    }

    pub fn numerical_failure(&self) -> bool {
        self.error().is_some_and(is_numerical_failure)
    }
}

pub fn herald_point(p: &Point, numerics: &Numerics) -> Result<HeraldedResult> {
    herald_squeezed_thermal(p.r, p.n_eff, p.theta, p.eta, p.m, numerics.min_dim)
}

pub fn evaluate_point(p: &Point, numerics: &Numerics) -> PointOutcome {
    let herald = herald_point(p, numerics);
    let report = herald.as_ref().ok().map(|h| {
        fitted_grid(&h.state, &numerics.report_options()).and_then(|g| report_on(&h.state, &g))
    });
    PointOutcome { point: *p, herald, report }
}

pub const POINT_COLUMNS: [&str; 13] = [
    "r",
    "n_eff",
    "m",
    "theta",
    "eta",
    "dim",
    "probability",
    "macroscopicity",
    "negativity",
    "mean_n",
    "macroscopicity_delta",
    "negativity_delta",
    "error",
];

fn point_row(o: &PointOutcome) -> Vec<Cell> {
    let p = &o.point;
    let h = o.herald.as_ref().ok();
    let rep = o.report.as_ref().and_then(|r| r.as_ref().ok());
    vec![
        p.r.into(),
        p.n_eff.into(),
        p.m.into(),
        p.theta.into(),
        p.eta.into(),
        h.map_or(Cell::Null, |h| h.state.dim().into()),
        Cell::opt(h.map(|h| h.probability)),
        Cell::opt(rep.map(|r| r.macroscopicity)),
        Cell::opt(rep.map(|r| r.negativity)),
        Cell::opt(h.map(|h| h.state.mean_number())),
        Cell::opt(rep.map(|r| r.macroscopicity_delta)),
        Cell::opt(rep.map(|r| r.negativity_delta)),
        o.error().map_or(Cell::Null, |e| Cell::Text(e.to_string())),
    ]
}

/// Cartesian product in the order r, n_eff, m, eta (last varies fastest).
fn subtraction_points(cfg: &SweepConfig) -> std::result::Result<Vec<Point>, CliError> {
    let mut pts = vec![];
    for r in cfg.r.values() {
        for &n_eff in &cfg.n_eff {
            for &m in &cfg.m {
                let theta = cfg.theta_for(m)?;
                for eta in cfg.eta.values() {
                    pts.push(Point { r, n_eff, theta, eta, m });
                }
            }
        }
    }
    Ok(pts)
}

fn run_points(cfg: &SweepConfig) -> std::result::Result<RunRecord, CliError> {
    let pts = subtraction_points(cfg)?;
    let outcomes: Vec<PointOutcome> = pts.par_iter().map(|p| evaluate_point(p, &cfg.numerics)).collect();
    let mut table = Table::new(&POINT_COLUMNS);
    for o in &outcomes {
        table.push(point_row(o));
    }
    let mut rec = RunRecord::new(cfg, table);
    rec.numerical_failures = outcomes.iter().filter(|o| o.numerical_failure()).count();
    if let Some(dir) = &cfg.output {
        for p in &cfg.dumps {
            rec.dumps.push(write_dump(dir, &dump_stem(p), p, &cfg.numerics, cfg.wigner_format)?.0);
        }
    }
    Ok(rec)
}

pub fn run_nonclassicality_sweep(cfg: &SweepConfig) -> std::result::Result<RunRecord, CliError> {
    run_points(cfg)
}

pub fn run_loss_sweep(cfg: &SweepConfig) -> std::result::Result<RunRecord, CliError> {
    let mut rec = run_points(cfg)?;
    if cfg.uses_assumed_theta() {
        rec.assumptions.push(LOSS_THETA_NOTE.into());
    }
    rec.assumptions.push("impossible heralds (probability 0) are recorded with empty cells".into());
    Ok(rec)
}

pub const PURITY_COLUMNS: [&str; 7] =
    ["kind", "r", "cooperativity", "n_eff", "n_th", "kappa_over_gamma", "error"];

enum PurityTask {
    Curve { r: f64, c: f64 },
    Contour { r: f64, target: f64 },
    Working { r: f64, c: f64 },
}

pub fn run_purity_sweep(cfg: &SweepConfig) -> RunRecord {
    let rs = cfg.r.values();
    let mut tasks = vec![];
    for &c in &cfg.cooperativity {
        tasks.extend(rs.iter().map(|&r| PurityTask::Curve { r, c }));
    }
    for &target in &cfg.n_eff_targets {
        tasks.extend(rs.iter().map(|&r| PurityTask::Contour { r, target }));
    }
    tasks.extend(cfg.working_points.iter().map(|w| PurityTask::Working { r: w.r, c: w.cooperativity }));

    let (n_th, ratio, b) = (cfg.n_th, cfg.kappa_over_gamma, cfg.bisection);
    let rows: Vec<Vec<Cell>> = tasks
        .par_iter()
        .map(|task| {
            let (kind, r, c, n, err) = match *task {
                PurityTask::Curve { r, c } | PurityTask::Working { r, c } => {
                    let kind = if matches!(task, PurityTask::Curve { .. }) { "curve" } else { "working_point" };
                    match purity_tradeoff(r, c, n_th, ratio) {
                        Ok(n) => (kind, r, Some(c), Some(n), None),
                        Err(e) => (kind, r, Some(c), None, Some(e)),
                    }
                }
                PurityTask::Contour { r, target } => {
                    match cooperativity_for_purity(r, target, n_th, ratio, (b.c_min, b.c_max), b.rel_tol) {
                        Ok(c) => ("contour", r, Some(c), Some(target), None),
                        Err(e) => ("contour", r, None, Some(target), Some(e)),
                    }
                }
            };
            vec![
                kind.into(),
                r.into(),
                Cell::opt(c),
                Cell::opt(n),
                n_th.into(),
                ratio.into(),
                err.map_or(Cell::Null, |e| Cell::Text(e.to_string())),
            ]
        })
        .collect();
    let mut table = Table::new(&PURITY_COLUMNS);
    for row in rows {
        table.push(row);
    }
    let mut rec = RunRecord::new(cfg, table);
    rec.assumptions
        .push(format!("rotating-wave steady state in the weak-coupling limit, kappa/gamma_m = {ratio}"));
    rec
}

fn dump_stem(p: &Point) -> String {
    format!("state_r{}_neff{}_theta{}_eta{}_m{}", p.r, p.n_eff, p.theta, p.eta, p.m)
}

fn write_file(
    dir: &Path,
    name: String,
    files: &mut Vec<String>,
    write: impl FnOnce(&mut BufWriter<File>) -> std::result::Result<(), CliError>,
) -> std::result::Result<(), CliError> {
    let mut w = BufWriter::new(File::create(dir.join(&name))?);
    write(&mut w)?;
    w.flush()?;
    files.push(name);
    Ok(())
}

/// Writes `<stem>_state.json`, the Wigner grid and `<stem>_report.json` for `p`.
/// Point failures end up in the returned outcome; only i/o errors are returned.
pub fn write_dump(
    dir: &Path,
    stem: &str,
    p: &Point,
    numerics: &Numerics,
    format: WignerFormat,
) -> std::result::Result<(Dump, PointOutcome), CliError> {
    std::fs::create_dir_all(dir)?;
    let mut files = vec![];
    let herald = herald_point(p, numerics);
    let h = match &herald {
        Ok(h) => h,
        Err(e) => {
            let dump = Dump { point: *p, files, error: Some(e.to_string()) };
            return Ok((dump, PointOutcome { point: *p, herald, report: None }));
        }
    };
    write_file(dir, format!("{stem}_state.json"), &mut files, |w| {
        Ok(serde_json::to_writer(w, &h.state.to_record())?)
    })?;
    let report = fitted_grid(&h.state, &numerics.report_options()).and_then(|grid| {
        let rep = report_on(&h.state, &grid);
        Ok((grid.coarsened()?, rep))
    });
    let report = match report {
        Ok((coarse, rep)) => {
            // The coarse grid keeps files a quarter of the size.
            match format {
                WignerFormat::Csv => {
                    write_file(dir, format!("{stem}_wigner.csv"), &mut files, |w| Ok(coarse.write_csv(w)?))?
                }
                WignerFormat::Binary => {
                    write_file(dir, format!("{stem}_wigner.bin"), &mut files, |w| Ok(coarse.write_binary(w)?))?;
                    write_file(dir, format!("{stem}_wigner.json"), &mut files, |w| {
                        Ok(serde_json::to_writer_pretty(w, &coarse.metadata())?)
                    })?;
                }
            }
            rep
        }
        Err(e) => Err(e),
    };
    if let Ok(rep) = &report {
        let body = serde_json::json!({
            "point": p,
            "dim": h.state.dim(),
            "probability": h.probability,
            "report": rep,
        });
        write_file(dir, format!("{stem}_report.json"), &mut files, |w| {
            Ok(serde_json::to_writer_pretty(w, &body)?)
        })?;
    }
    let error = report.as_ref().err().map(|e| e.to_string());
    let outcome = PointOutcome { point: *p, herald: herald.clone(), report: Some(report) };
    Ok((Dump { point: *p, files, error }, outcome))
}

/// Single heralded state with its grid and report. Module errors propagate.
pub fn dump_state(cfg: &SweepConfig) -> std::result::Result<RunRecord, CliError> {
    let dir = cfg.output.as_deref().ok_or_else(|| CliError::Config("state mode needs an output directory".into()))?;
    let p = subtraction_points(cfg)?[0];
    let (dump, outcome) = write_dump(dir, "state", &p, &cfg.numerics, cfg.wigner_format)?;
    if let Some(e) = outcome.error() {
        return Err(e.clone().into());
    }
    let mut table = Table::new(&POINT_COLUMNS);
    table.push(point_row(&outcome));
    let mut rec = RunRecord::new(cfg, table);
    rec.dumps.push(dump);
    Ok(rec)
}
