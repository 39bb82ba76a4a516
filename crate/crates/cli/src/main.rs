//! `isrp`: batch front end for simulation, ISRP profiles, curve fitting,
//! two-stage model selection and bootstrap AIC frequencies.

mod commands;
mod config;
mod error;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Layout;

#[derive(Debug, Parser)]
#[command(name = "isrp", version, about = "Interval-specific rate parameters and growth-model selection")]
pub struct Cli {
    /// Configuration file (.json or .toml); flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Random seed (default: config, then $ISRP_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the model catalog.
    Catalog(CatalogArgs),
    /// Simulate trajectories under a Koopman covariance.
    Simulate(SimulateArgs),
    /// Estimate the ISRP profile of a dataset, or summarize it over simulated replicates.
    Isrp(IsrpArgs),
    /// Fit one curve by nonlinear least squares.
    Fit(FitArgs),
    /// Two-stage selection: rate forms on the ISRP profile, then full models.
    Select(SelectArgs),
    /// Bootstrap frequencies of the AIC winner among candidate models.
    Bootstrap(BootstrapArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CatalogFormat {
    Json,
    Dot,
    Table,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[arg(long, value_enum)]
    pub format: Option<CatalogFormat>,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Input CSV.
    #[arg(long, short = 'i', value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub layout: Option<Layout>,
    #[arg(long, value_name = "NAME")]
    pub time_column: Option<String>,
    #[arg(long, value_name = "NAME")]
    pub value_column: Option<String>,
    /// Time step for series given as a single value column.
    #[arg(long)]
    pub step: Option<f64>,
    /// Country filter for the owid layout.
    #[arg(long)]
    pub location: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct PlanArgs {
    /// Generating model, `parent` or `parent/variation`.
    #[arg(long)]
    pub model: Option<String>,
    /// Model parameter, e.g. `r0=0.3`; repeatable.
    #[arg(long = "param", value_name = "P=V")]
    pub params: Vec<String>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Number of time points.
    #[arg(long)]
    pub q: Option<usize>,
    /// Individuals per dataset.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Replicate index to draw.
    #[arg(long, default_value_t = 0)]
    pub replicate: usize,
    /// Output directory.
    #[arg(long, short = 'o', value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IsrpArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long)]
    pub parent: Option<String>,
    /// `r` or `k`.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Known initial mean for the K estimator.
    #[arg(long)]
    pub baseline: Option<f64>,
    #[arg(long)]
    pub baseline_time: Option<f64>,
    /// Koopman variance for delta-method intervals (default: sample covariance).
    #[arg(long)]
    pub koopman_sigma2: Option<f64>,
    #[arg(long)]
    pub koopman_rho: Option<f64>,
    #[arg(long, short = 'o', value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Catalog model, `parent` or `parent/variation`.
    #[arg(long)]
    pub model: Option<String>,
    /// `size`, `rgr` or `rate`.
    #[arg(long)]
    pub curve: Option<String>,
    /// Rate form for `--curve rate`.
    #[arg(long)]
    pub form: Option<String>,
    /// Initial value, e.g. `k=450`; repeatable.
    #[arg(long = "param", value_name = "P=V")]
    pub params: Vec<String>,
    /// Hold a parameter at its initial value; repeatable.
    #[arg(long, value_name = "P")]
    pub fix: Vec<String>,
    /// Box constraint, e.g. `c=0:2` (either side may be empty); repeatable.
    #[arg(long = "bound", value_name = "P=LO:HI")]
    pub bounds: Vec<String>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, short = 'o', value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub parent: Option<String>,
    /// Comma-separated rate forms.
    #[arg(long, value_delimiter = ',')]
    pub forms: Option<Vec<String>>,
    /// Include the sine and cosine forms.
    #[arg(long)]
    pub periodic: bool,
    /// Fit only the first half of the intervals.
    #[arg(long)]
    pub early_only: bool,
    /// Forms within this ΔAIC of the best reach the model stage.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Smooth each trajectory with a centered moving average first.
    #[arg(long, value_name = "W")]
    pub moving_average: Option<usize>,
    #[arg(long, short = 'o', value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `MODEL[:p=v,...]`; listed parameters are held fixed. Repeatable.
    #[arg(long = "candidate", value_name = "SPEC")]
    pub candidates: Vec<String>,
    /// Number of resamples.
    #[arg(long, short = 'b')]
    pub replicates: Option<usize>,
    #[arg(long, short = 'o', value_name = "DIR")]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            let err = error::CliError::config(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.line());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
