//! `pt-spectra` command-line driver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use commands::CliError;

#[derive(Parser)]
#[command(name = "pt-spectra", version, about = "Spectra and classical orbits of H = p^2 + m^2 x^2 - (ix)^N")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Shoot,
    Matrix,
    Wkb,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues at a single exponent
    Spectrum {
        #[arg(long = "N")]
        exponent: f64,
        #[arg(long, default_value_t = 0.0)]
        m2: f64,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Shoot)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Eigenvalues over a grid of exponents, written to a data file plus a plot script
    Sweep {
        #[arg(long)]
        n_min: f64,
        #[arg(long)]
        n_max: f64,
        #[arg(long, default_value_t = 0.05)]
        dn: f64,
        #[arg(long, default_value_t = 1.0)]
        m2: f64,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Shoot)]
        method: MethodArg,
        /// Output file; defaults to sweep.csv (or .json) in $PT_SPECTRA_OUT or the working directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Worker threads; defaults to the number of processors
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Regenerates the exact/WKB level table and the near-linear ground-state table
    Tables,
    /// Integrates a classical trajectory at real energy
    Classical {
        #[arg(long = "N")]
        exponent: f64,
        #[arg(long = "E")]
        energy: f64,
        /// Start point as "re,im"; defaults to the turning point x_+
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Trajectory file; defaults to classical_N<N>_E<E>.csv in $PT_SPECTRA_OUT or the working directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Bisects for the exponent where a pair of levels merges
    Merge {
        #[arg(long, default_value_t = 1)]
        pair: usize,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 0.0)]
        m2: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum {
            exponent,
            m2,
            levels,
            method,
            format,
        } => commands::spectrum(exponent, m2, levels, method, format),
        Command::Sweep {
            n_min,
            n_max,
            dn,
            m2,
            levels,
            method,
            out,
            format,
            jobs,
        } => commands::sweep(
            commands::SweepArgs {
                n_min,
                n_max,
                dn,
                m2,
                levels,
                method,
            },
            out,
            format,
            jobs,
        ),
        Command::Tables => commands::tables(),
        Command::Classical {
            exponent,
            energy,
            x0,
            t_max,
            dt,
            out,
            format,
        } => commands::classical(exponent, energy, x0.as_deref(), t_max, dt, out, format),
        Command::Merge { pair, lo, hi, m2, tol } => commands::merge(pair, lo, hi, m2, tol),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
