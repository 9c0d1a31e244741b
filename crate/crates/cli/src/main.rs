//! `hyperlune` — bound tables, lune sharpness and polygon dominance sweeps,
//! Pontryagin certificates and limit checks.
//!
//! Exit status: 0 on success, 1 when a mathematical check fails, 2 on usage
//! or domain errors.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "hyperlune", version, about = "Reverse isoperimetric bounds for λ-convex curves on the hyperbolic plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Directory for output files; tables go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv")]
    format: Vec<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct Lengths {
    /// Curve length(s).
    #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
    l: Vec<f64>,
    #[arg(long = "L-min", allow_hyphen_values = true)]
    l_min: Option<f64>,
    #[arg(long = "L-max", allow_hyphen_values = true)]
    l_max: Option<f64>,
    #[arg(long = "L-steps")]
    l_steps: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the sharp lower area bound.
    Bound {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        k: f64,
        #[command(flatten)]
        lengths: Lengths,
        #[command(flatten)]
        common: Common,
    },
    /// Compare lune areas with the bound on a (λ, L) grid.
    Sharpness {
        /// Curvature bounds (comma separated); defaults to one per regime.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[command(flatten)]
        lengths: Lengths,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Relative change of the lune separation (negative control).
        #[arg(long, allow_hyphen_values = true)]
        perturb: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Check random λ-polygons against the bound.
    Dominance {
        #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
        lambda: f64,
        /// Number of polygons.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Largest arc count; samples cycle through 2..=arcs.
        #[arg(long, default_value_t = 8)]
        arcs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the Pontryagin certificate on a circle, lune, polygon or profile.
    Pmp {
        #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
        lambda: f64,
        #[arg(long, value_enum, default_value = "lune")]
        shape: Shape,
        /// Lune length.
        #[arg(long = "L", default_value_t = 3.0)]
        l: f64,
        /// Support profile CSV to certify instead of a built shape.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Arc count for `--shape polygon`.
        #[arg(long, default_value_t = 3)]
        arcs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Profile samples.
        #[arg(long, default_value_t = 2048)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-regime continuity and the Euclidean limit.
    Limits {
        /// Curvature scales (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "1,0.01,0.001")]
        k: Vec<f64>,
        /// Curvature bound for the Euclidean comparison.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[command(flatten)]
        lengths: Lengths,
        /// Largest accepted cross-regime deviation at the smallest ε.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Circle,
    Lune,
    Polygon,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Bound { lambda, k, lengths, common } => {
            let cfg = RunConfig::new("bound", &common, None, None)?;
            let ls = lengths.resolve(None)?;
            commands::bound(&cfg, lambda, k, &ls)
        }
        Command::Sharpness { lambda, lengths, tol, perturb, common } => {
            let cfg = RunConfig::new("sharpness", &common, None, Some(tol))?;
            commands::sharpness(&cfg, &lambda, &lengths, perturb)
        }
        Command::Dominance { lambda, count, arcs, seed, tol, common } => {
            let cfg = RunConfig::new("dominance", &common, Some(seed), Some(tol))?;
            commands::dominance(&cfg, lambda, count, arcs)
        }
        Command::Pmp { lambda, shape, l, profile, arcs, seed, steps, common } => {
            let cfg = RunConfig::new("pmp", &common, Some(seed), None)?;
            commands::pmp(&cfg, lambda, shape, l, profile.as_deref(), arcs, steps)
        }
        Command::Limits { k, lambda, lengths, tol, common } => {
            let cfg = RunConfig::new("limits", &common, None, Some(tol))?;
            let ls = lengths.resolve(Some(&[0.5, 1.0, 2.0, 4.0]))?;
            commands::limits(&cfg, &k, lambda, &ls)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
