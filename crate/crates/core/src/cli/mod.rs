//! Batch driver: configuration, the scan commands, and CSV/JSON output.

mod config;
mod output;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    GridKind, ScanConfig, CDW_MAX_SITES, MI_MAX_SITES, PAGE_MAX_SITES_CDW, PAGE_MAX_SITES_MI,
};
pub use output::{fmt_sig, sidecar_path};
pub use run::{
    random_matrix, run_bench, run_finite_u, run_scan, run_size_scaling, run_structure_report, FiniteUResults, Jump,
    PracticalBound, ScalingFits, ScalingResults, ScalingRow, ScanResults, TraceAverage, BENCH_HEADER,
    FINITE_U_HEADER, SCALING_HEADER, SCAN_HEADER, VERSION,
};

use crate::correlations::InitialState;
use crate::error::{Error, Result};
use crate::permanent::{Accumulation, Engine};

#[derive(Debug, Parser)]
#[command(name = "quench-renyi", version, about = "Second Renyi entropy after a bosonic quench, via matrix permanents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S2(t) per size and time, one CSV row per point
    Scan(Overrides),
    /// Time-averaged densities against 1/L with linear fits
    SizeScaling(Overrides),
    /// Block structure of the correlation matrix (MI), as JSON
    Structure(Overrides),
    /// Exact-diagonalization traces at finite interaction
    FiniteU(Overrides),
    /// Permanent engine timings on seeded random matrices (sizes are matrix sizes)
    Bench {
        #[command(flatten)]
        common: Overrides,
        /// Engines to time
        #[arg(long, value_delimiter = ',', default_value = "ryser,bbfg")]
        engines: Vec<String>,
        /// Recompute with parallel BBFG at these worker counts to gauge rounding
        #[arg(long, value_delimiter = ',')]
        variation_workers: Vec<usize>,
    },
}

/// Flags shared by every command; each replaces the config-file value.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML file with ScanConfig fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Initial state: MI or CDW
    #[arg(long)]
    pub state: Option<InitialState>,
    /// Chain lengths (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Sites in subsystem A (default: half the chain)
    #[arg(long)]
    pub subsystem: Option<usize>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub tpoints: Option<usize>,
    /// Time grid spacing: lin or log
    #[arg(long)]
    pub tgrid: Option<GridKind>,
    /// Explicit times tJ (comma separated), replacing the grid
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub times: Option<Vec<f64>>,
    /// Explicit tJ/L values (comma separated), replacing the grid
    #[arg(long, value_delimiter = ',')]
    pub times_per_site: Option<Vec<f64>>,
    /// Permanent engine: naive, ryser, bbfg or bbfg-par
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Summation: plain or compensated
    #[arg(long, value_parser = parse_accumulation)]
    pub accumulation: Option<Accumulation>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (CSV, or JSON for structure); stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also compute the Gaussian-state reference
    #[arg(long)]
    pub gaussian: bool,
    /// Also sample the Page value
    #[arg(long)]
    pub page: bool,
    #[arg(long)]
    pub page_samples: Option<usize>,
    /// Add correlation-matrix structure reports to the scan sidecar
    #[arg(long)]
    pub structure: bool,
    #[arg(long)]
    pub structure_eps: Option<f64>,
    /// Leave the s_tilde column empty
    #[arg(long)]
    pub no_s_tilde: bool,
    /// Skip the rigorous bound check and leave lower_bound empty
    #[arg(long)]
    pub no_bounds: bool,
    /// Size scaling from the Gaussian reference only
    #[arg(long)]
    pub no_permanent: bool,
    /// Prefactor of the conjectured bound c(1-g)L~, reported in the sidecar
    #[arg(long)]
    pub conjecture_constant: Option<f64>,
    #[arg(long)]
    pub fit_sizes: Option<usize>,
    /// U/J values for finite-u (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub interactions: Option<Vec<f64>>,
}

fn parse_accumulation(s: &str) -> std::result::Result<Accumulation, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "plain" => Ok(Accumulation::Plain),
        "compensated" | "kahan" => Ok(Accumulation::Compensated),
        _ => Err(format!("unknown accumulation {s:?}, expected plain or compensated")),
    }
}

impl Overrides {
    /// The config file (or defaults) with every given flag applied.
    pub fn resolve(&self) -> Result<ScanConfig> {
        let mut c = match &self.config {
            Some(p) => ScanConfig::from_file(p)?,
            None => ScanConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    c.$f = v.clone();
                }
            )*};
        }
        set!(state, sizes, tmin, tmax, tpoints, tgrid, engine, workers, accumulation, seed, page_samples, structure_eps, fit_sizes, interactions);
        if self.subsystem.is_some() {
            c.subsystem = self.subsystem;
        }
        if self.times.is_some() {
            c.times = self.times.clone();
            c.times_per_site = None;
        }
        if self.times_per_site.is_some() {
            c.times_per_site = self.times_per_site.clone();
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.conjecture_constant.is_some() {
            c.conjecture_constant = self.conjecture_constant;
        }
        c.gaussian |= self.gaussian;
        c.page |= self.page;
        c.structure |= self.structure;
        c.s_tilde &= !self.no_s_tilde;
        c.bounds &= !self.no_bounds;
        c.permanent &= !self.no_permanent;
        Ok(c)
    }
}

/// Runs one command; errors carry the machine-readable category used for
/// the exit code.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Scan(o) => run_scan(&o.resolve()?).map(drop),
        Command::SizeScaling(o) => run_size_scaling(&o.resolve()?).map(drop),
        Command::Structure(o) => run_structure_report(&o.resolve()?).map(drop),
        Command::FiniteU(o) => run_finite_u(&o.resolve()?).map(drop),
        Command::Bench { common, engines, variation_workers } => {
            let cfg = common.resolve()?;
            let engines = engines
                .iter()
                .map(|e| {
                    let e: Engine = e.parse()?;
                    Ok(match e {
                        Engine::BbfgParallel { .. } if common.workers.is_some() => Engine::BbfgParallel { workers: cfg.workers },
                        e => e,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if variation_workers.contains(&0) {
                return Err(Error::Config("variation worker counts must be at least 1".into()));
            }
            run_bench(&cfg, &engines, variation_workers).map(drop)
        }
    }
}

/// Entry point of the binary: parses arguments, runs, and maps errors to
/// `error[category]: message` on stderr plus the category's exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}
