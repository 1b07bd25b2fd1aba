use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_list, parse_usize_list, Mode, OutputFormat, Range, SweepConfig, WignerFormat};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "phonocat", version, about = "Heralded phonon-subtraction sweeps and feasibility estimates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state n_eff(r) curves per cooperativity and C(r) contours.
    Purity(RunArgs),
    /// I and N versus r for several n_eff and m, lossless detection.
    Nonclassicality(RunArgs),
    /// Heralding probability and I versus detection efficiency.
    Losses(RunArgs),
    /// Event rates and timescales from device parameters.
    Feasibility(RunArgs),
    /// One heralded state with its Wigner grid and report.
    State(RunArgs),
}

impl Command {
    pub fn split(self) -> (Mode, RunArgs) {
        match self {
            Command::Purity(a) => (Mode::Purity, a),
            Command::Nonclassicality(a) => (Mode::Nonclassicality, a),
            Command::Losses(a) => (Mode::Losses, a),
            Command::Feasibility(a) => (Mode::Feasibility, a),
            Command::State(a) => (Mode::State, a),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WignerFormatArg {
    Csv,
    Binary,
}

/// Flags shared by all subcommands. Each overrides the config-file value.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON config using the SweepConfig field names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (table to stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exit with status 3 if any point fails to converge.
    #[arg(long)]
    pub strict: bool,
    /// Record the wall-clock time (makes the output non-reproducible).
    #[arg(long)]
    pub timing: bool,
    /// Print the resolved config and exit.
    #[arg(long)]
    pub print_config: bool,
    /// Squeezing values: `a,b,c` or `start:stop:num`.
    #[arg(long)]
    pub r: Option<String>,
    /// Detection efficiencies: `a,b,c` or `start:stop:num`.
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub n_eff: Option<String>,
    #[arg(long)]
    pub n_eff_target: Option<String>,
    #[arg(long)]
    pub cooperativity: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    /// One beamsplitter angle for every m.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub n_th: Option<f64>,
    #[arg(long)]
    pub kappa_over_gamma: Option<f64>,
    #[arg(long)]
    pub min_dim: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long, value_enum)]
    pub wigner_format: Option<WignerFormatArg>,
    /// Skip the Wigner/state dumps of the sweep modes.
    #[arg(long)]
    pub no_dumps: bool,
}

impl RunArgs {
    /// Default config for `mode`, then the config file, then the flags.
    pub fn resolve(&self, mode: Mode) -> Result<SweepConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::load(path, mode)?,
            None => SweepConfig::defaults(mode),
        };
        let cfg_err = |e: String| CliError::Config(e);
        if let Some(s) = &self.r {
            cfg.r = Range::parse(s).map_err(cfg_err)?;
        }
        if let Some(s) = &self.eta {
            cfg.eta = Range::parse(s).map_err(cfg_err)?;
        }
        if let Some(s) = &self.n_eff {
            cfg.n_eff = parse_list(s).map_err(cfg_err)?;
        }
        if let Some(s) = &self.n_eff_target {
            cfg.n_eff_targets = parse_list(s).map_err(cfg_err)?;
        }
        if let Some(s) = &self.cooperativity {
            cfg.cooperativity = parse_list(s).map_err(cfg_err)?;
        }
        if let Some(s) = &self.m {
            cfg.m = parse_usize_list(s).map_err(cfg_err)?;
        }
        if let Some(t) = self.theta {
            cfg.theta = Some(t);
        }
        if let Some(v) = self.n_th {
            cfg.n_th = v;
        }
        if let Some(v) = self.kappa_over_gamma {
            cfg.kappa_over_gamma = v;
        }
        if let Some(v) = self.min_dim {
            cfg.numerics.min_dim = v;
        }
        if let Some(v) = self.grid_points {
            cfg.numerics.grid_points = v;
        }
        if let Some(f) = self.wigner_format {
            cfg.wigner_format = match f {
                WignerFormatArg::Csv => WignerFormat::Csv,
                WignerFormatArg::Binary => WignerFormat::Binary,
            };
        }
        if let Some(f) = self.format {
            cfg.format = match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
        }
        if let Some(o) = &self.output {
            cfg.output = Some(o.clone());
        }
        if self.no_dumps {
            cfg.dumps.clear();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
