//! `pointres`: resonances of point-interaction Hamiltonians from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pointres_core::Complex64;

#[derive(Parser, Debug)]
#[command(name = "pointres", version, about = "Resonances of Schrödinger operators with point interactions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Configuration file: {"centers": [[x,y,z], ...], "alpha": [{"re": r, "im": i} | "inf", ...]}
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write results here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Search window re_min,re_max,im_min,im_max
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<[f64; 4]>,
    /// Frequency bins (frontier) or frequencies per band (tetra-check)
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Sampled tuples per frontier run
    #[arg(long, global = true, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_parser = parse_positive)]
    tol: Option<f64>,
    /// Worker threads; defaults to the available parallelism
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Class {
    Real,
    Dissipative,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the resonances in a window with multiplicities
    Solve,
    /// Decay frontier over a frequency range
    Frontier {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,2")]
        f_range: (f64, f64),
        #[arg(long, value_enum, default_value_t = Class::Real)]
        class: Class,
        /// Largest decay searched
        #[arg(long, default_value_t = 3.0)]
        r_cap: f64,
    },
    /// Certify that a resonance has locally minimal decay
    Certify {
        /// The resonance, as re,im
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        k: Option<Complex64>,
        /// Use the nearest resonance to this point, as re,im
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        hint: Option<Complex64>,
        /// Certify along the ray condition or the line condition
        #[arg(long, value_enum, default_value_t = Mode::Ray)]
        mode: Mode,
    },
    /// Refine the input tuple to a minimal-decay resonance at fixed frequency or energy
    Refine {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "energy", required_unless_present = "energy")]
        f: Option<f64>,
        #[arg(long)]
        energy: Option<f64>,
        /// Starting decay; defaults to that of the input tuple's nearest resonance
        #[arg(long)]
        r0: Option<f64>,
    },
    /// Compare the solver with the closed-form tetrahedron frontier
    TetraCheck {
        /// Edge length; taken from the input when one is given
        #[arg(long)]
        l: Option<f64>,
        /// Number of bands starting at f = 0
        #[arg(long, default_value_t = 2)]
        bands: usize,
    },
    /// Check every zero in a window against the strip bounds and the uniform envelope
    Bounds {
        /// Half-width of the default window
        #[arg(long, default_value_t = 50.0)]
        half_width: f64,
    },
    /// Print the exponential-polynomial form of the determinant
    Expand,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Ray,
    Line,
}

/// How a run failed, mapped onto the exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// unreadable input or arguments (exit 1)
    #[error("{0}")]
    Parse(String),
    /// the solver could not produce the requested object (exit 2)
    #[error("{0}")]
    Solver(String),
    /// a certificate or bound check failed; output was written (exit 3)
    #[error("{0}")]
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

impl From<pointres_core::Error> for Failure {
    fn from(e: pointres_core::Error) -> Self {
        match e {
            pointres_core::Error::Json(_) => Failure::Parse(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", parts.len()));
    }
    parts
        .iter()
        .enumerate()
        .map(|(i, p)| p.parse::<f64>().map_err(|e| format!("item {}: {p:?}: {e}", i + 1)))
        .collect()
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let v = floats(s, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let v = floats(s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("{x} is not positive")),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli.common, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
