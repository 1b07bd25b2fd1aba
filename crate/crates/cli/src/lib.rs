//! Parameter sweeps and feasibility estimates for heralded phonon subtraction,
//! written as CSV/JSON with the full config embedded in every run record.
//!
//! Subcommands of the `phonocat` executable map onto [`execute`]:
//!
//! | mode              | table columns                                   |
//! |-------------------|-------------------------------------------------|
//! | `purity`          | [`sweeps::PURITY_COLUMNS`]                      |
//! | `nonclassicality` | [`sweeps::POINT_COLUMNS`]                       |
//! | `losses`          | [`sweeps::POINT_COLUMNS`]                       |
//! | `state`           | [`sweeps::POINT_COLUMNS`] plus dumped files     |
//! | `feasibility`     | `quantity,r,m,probability,value,unit`           |

pub mod cli;
pub mod config;
pub mod error;
pub mod feasibility;
pub mod record;
pub mod sweeps;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use clap::Parser;

pub use config::{Mode, OutputFormat, Point, Range, SweepConfig};
pub use error::CliError;
pub use record::{Cell, RunRecord, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

/// Runs the sweep described by `cfg` on the current rayon pool.
pub fn execute(cfg: &SweepConfig) -> Result<RunRecord, CliError> {
    match cfg.mode {
        Mode::Purity => Ok(sweeps::run_purity_sweep(cfg)),
        Mode::Nonclassicality => sweeps::run_nonclassicality_sweep(cfg),
        Mode::Losses => sweeps::run_loss_sweep(cfg),
        Mode::State => sweeps::dump_state(cfg),
        Mode::Feasibility => Ok(feasibility::run_feasibility(cfg)?),
    }
}

/// Writes the record: `record.json` (and `<mode>.csv` for CSV output) in the
/// output directory, or the table/record on stdout.
pub fn emit(rec: &RunRecord) -> Result<(), CliError> {
    let cfg = &rec.config;
    match &cfg.output {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            if cfg.format == OutputFormat::Csv {
                let mut w = BufWriter::new(File::create(dir.join(format!("{}.csv", rec.mode.name())))?);
                rec.table.write_csv(&mut w)?;
                w.flush()?;
            }
            let mut w = BufWriter::new(File::create(dir.join("record.json"))?);
            serde_json::to_writer_pretty(&mut w, rec)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            match cfg.format {
                OutputFormat::Csv => rec.table.write_csv(&mut out)?,
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut out, rec)?;
                    writeln!(out)?;
                }
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs and emits; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("phonocat: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: cli::Cli) -> Result<i32, CliError> {
    let (mode, args) = cli.command.split();
    let cfg = args.resolve(mode)?;
    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(EXIT_OK);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut rec = pool.install(|| execute(&cfg))?;
    if args.timing {
        rec.wall_clock_s = Some(start.elapsed().as_secs_f64());
    }
    emit(&rec)?;
    if rec.numerical_failures > 0 {
        eprintln!("phonocat: {} point(s) did not converge", rec.numerical_failures);
        if args.strict {
            return Ok(EXIT_NON_CONVERGENCE);
        }
    }
    Ok(EXIT_OK)
}
