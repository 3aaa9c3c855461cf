//! `bellscope`: batch sweeps over the Bell-factor engine, writing
//! `<command>.csv` and `<command>.json` into the output directory.

mod commands;
mod output;
mod range;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{ConstraintArg, LabelingArg, Report};
use output::{render_csv, write_outputs, Summary};
use range::{FloatRange, IntRange};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] bellscope_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "bellscope", version, about = "Bell-factor sweeps for binned homodyne measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, env = "BELLSCOPE_JOBS", default_value_t = 0)]
    jobs: usize,
    /// Tolerance override: overlap quadrature for cat-vw/psi3-curve, convergence delta for sign-optimize
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// GHZ state under sign binning with GHZ-like angles
    SignGhz {
        #[arg(long, default_value = "3")]
        m: IntRange,
    },
    /// Optimal photon-number-correlated state for sign binning
    SignOptimize {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        d: usize,
        #[arg(long, value_enum, default_value_t = ConstraintArg::None)]
        constraint: ConstraintArg,
    },
    /// Root binning at V = W = 1
    RootMax {
        #[arg(long, default_value = "2:8")]
        m: IntRange,
        /// State phase; defaults to (1 - m) pi / 4
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        #[arg(long, value_enum, default_value_t = LabelingArg::Best)]
        labeling: LabelingArg,
    },
    /// Cat-state V, W overlaps and the resulting root-binned Bell factors
    CatVw {
        #[arg(long, default_value = "6")]
        alpha: FloatRange,
        #[arg(long, default_value = "2:3")]
        m: IntRange,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, value_enum, default_value_t = LabelingArg::Best)]
        labeling: LabelingArg,
    },
    /// Three-mode coherent state Bell factor by domain integration
    Psi3Curve {
        #[arg(long, default_value = "0.5:3.0:0.05")]
        alpha: FloatRange,
        #[arg(long, value_enum, default_value_t = LabelingArg::Best)]
        labeling: LabelingArg,
    },
    /// GHZ Bell factor under independent per-mode erasure
    NoiseSweep {
        #[arg(long, default_value = "3")]
        m: IntRange,
        #[arg(long, default_value = "0:0.3:0.05")]
        p: FloatRange,
    },
    /// Fidelity of the conditionally prepared three-mode state
    PrepFidelity {
        #[arg(long, default_value = "3")]
        alpha: FloatRange,
        /// Conditioning values; defaults to the fidelity-optimal one per alpha
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<FloatRange>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SignGhz { .. } => "sign-ghz",
            Command::SignOptimize { .. } => "sign-optimize",
            Command::RootMax { .. } => "root-max",
            Command::CatVw { .. } => "cat-vw",
            Command::Psi3Curve { .. } => "psi3-curve",
            Command::NoiseSweep { .. } => "noise-sweep",
            Command::PrepFidelity { .. } => "prep-fidelity",
        }
    }
}

fn execute(command: &Command, tol: Option<f64>) -> Result<Report, CliError> {
    match command {
        Command::SignGhz { m } => commands::sign_ghz(m),
        Command::SignOptimize { m, d, constraint } => commands::sign_optimize(*m, *d, *constraint, tol),
        Command::RootMax { m, theta, labeling } => commands::root_max(m, *theta, *labeling),
        Command::CatVw { alpha, m, theta, labeling } => commands::cat_vw(alpha, m, *theta, *labeling, tol),
        Command::Psi3Curve { alpha, labeling } => commands::psi3_curve(alpha, *labeling, tol),
        Command::NoiseSweep { m, p } => commands::noise_sweep(m, p),
        Command::PrepFidelity { alpha, x0 } => commands::prep_fidelity(alpha, x0.as_ref()),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("--tol must be positive, got {t}")));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cli.jobs)))?;
    let name = cli.command.name();
    let start = Instant::now();
    let report = pool.install(|| execute(&cli.command, cli.tol))?;
    let wall = start.elapsed().as_secs_f64();

    let csv = render_csv(&report.header, &report.rows);
    let mut inputs = report.inputs;
    if let Some(obj) = inputs.as_object_mut() {
        obj.insert("jobs".into(), cli.jobs.into());
        obj.insert("tol".into(), cli.tol.into());
    }
    let summary = Summary {
        command: name.to_string(),
        inputs,
        headline: report.headline,
        tolerances: report.tolerances,
        rows: report.rows.len(),
        csv_file: format!("{name}.csv"),
        wall_time_s: wall,
    };
    write_outputs(&cli.out, name, &csv, &summary)?;
    println!("{name}: {} rows in {wall:.3} s -> {}", summary.rows, cli.out.display());
    println!("{}", serde_json::to_string(&summary.headline).unwrap_or_default());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bellscope: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
