//! `bbl-lab`: deficits, transport bounds, Minkowski-plane balls and
//! gap-function sweeps from the command line.
//!
//! Exit codes: 0 success, 2 inequality violated beyond tolerance,
//! 1 usage, parse or domain error.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod inputs;
mod literal;

use std::path::PathBuf;
use std::process::ExitCode;

use bbl_core::Exponent;
use clap::{Args, Parser, Subcommand, ValueEnum};

use literal::{Angle, Matrix2, Pair, SetLiteral, SpaceSpec};

/// Parsed run configuration.
#[derive(Parser, Debug)]
#[command(name = "bbl-lab", version, about = "Borell-Brascamp-Lieb deficit laboratory")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Deficits, bounds and equality diagnostics.
    #[command(subcommand)]
    Bbl(BblCommand),
    /// Optimal transport between two sets.
    #[command(subcommand)]
    Ot(OtCommand),
    /// Balls of Minkowski norms on the plane.
    #[command(subcommand)]
    Finsler(FinslerCommand),
    /// Gap-function experiments.
    #[command(subcommand)]
    Gap(GapCommand),
}

#[derive(Subcommand, Debug)]
pub enum BblCommand {
    /// Deficit, transport lower bound and diagnostics for f, g, h.
    Deficit(DensityArgs),
    /// Transport lower bound alone (h defaults to the admissible one).
    Bound(DensityArgs),
    /// Equality diagnostics for f, g, h.
    Diagnose(DensityArgs),
    /// Recover the normal-form parameters of an equality triple.
    DubucFit(DensityArgs),
    /// Quantitative Brunn-Minkowski for two sets.
    Bm(BmArgs),
    /// Distorted Brunn-Minkowski on a model space.
    DistortedBm(DistortedArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OtMethod {
    /// Exact when within the pair cap, entropic otherwise.
    Auto,
    Exact,
    Entropic,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Grid spacing (also the spacing of CSV inputs).
    #[arg(long = "grid-h", default_value_t = 1.0 / 32.0)]
    pub grid_h: f64,
    /// Lower corner of CSV inputs.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub origin: Vec<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DensityArgs {
    #[arg(long)]
    pub f: SetLiteral,
    #[arg(long)]
    pub g: SetLiteral,
    /// Defaults to the smallest admissible h on the grid.
    #[arg(long)]
    pub h: Option<SetLiteral>,
    #[arg(long)]
    pub s: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Exponent,
    #[arg(long, value_enum, default_value_t = OtMethod::Auto)]
    pub ot: OtMethod,
    /// Entropic regularization (entropic transport only).
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Absolute tolerance replacing the discretization error estimate.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone)]
pub struct BmArgs {
    #[arg(long = "A")]
    pub a: SetLiteral,
    #[arg(long = "B")]
    pub b: SetLiteral,
    #[arg(long)]
    pub s: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Exponent,
    /// Absolute tolerance replacing the discretization error estimate.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Rasterize even when the exact polygon path applies.
    #[arg(long)]
    pub grid_only: bool,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DistortedArgs {
    #[arg(long, default_value = "euclidean")]
    pub space: SpaceSpec,
    #[arg(long = "A")]
    pub a: SetLiteral,
    #[arg(long = "B")]
    pub b: SetLiteral,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Subcommand, Debug)]
pub enum OtCommand {
    /// Transport plan between the normalized volume measures of two sets.
    Solve(OtArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OtArgs {
    #[arg(long, default_value = "euclidean")]
    pub space: SpaceSpec,
    #[arg(long = "A")]
    pub a: SetLiteral,
    #[arg(long = "B")]
    pub b: SetLiteral,
    #[arg(long, conflicts_with = "entropic")]
    pub exact: bool,
    #[arg(long)]
    pub entropic: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    Randers,
    Matsumoto,
    Euclidean,
}

#[derive(Subcommand, Debug)]
pub enum FinslerCommand {
    /// Forward and backward balls, homothety test and BM deficit.
    Balls(BallsArgs),
}

#[derive(Args, Debug, Clone)]
pub struct BallsArgs {
    #[arg(long, value_enum)]
    pub norm: NormKind,
    /// Randers matrix `q11,q12,q21,q22`.
    #[arg(long, default_value = "5,-1,-1,1", allow_hyphen_values = true)]
    pub q: Matrix2,
    /// Randers drift `b1,b2`.
    #[arg(long, default_value = "0.2,0.5", allow_hyphen_values = true)]
    pub b: Pair,
    /// Matsumoto slope angle (`35deg` or radians).
    #[arg(long, default_value = "35deg")]
    pub alpha: Angle,
    /// Matsumoto walking speed, or the euclidean scale.
    #[arg(long, default_value_t = 6.0)]
    pub v: f64,
    #[arg(long, default_value_t = bbl_core::finsler::GRAVITY)]
    pub gravity: f64,
    /// Forward-ball center.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub x: Pair,
    /// Forward-ball radius.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Backward-ball center.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub y: Pair,
    /// Backward-ball radius.
    #[arg(long = "R", default_value_t = 1.0)]
    pub big_r: f64,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    /// Angular samples per ball.
    #[arg(long, default_value_t = bbl_core::finsler::DEFAULT_SAMPLES)]
    pub m: usize,
    /// Override the homothety residual threshold.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GapCommand {
    /// Quantitative Hölder check on seeded random inputs, as CSV.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads (0 = available parallelism).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a successful run.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// An inequality failed beyond its tolerance.
    Violation,
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&config) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        RunConfig::command().debug_assert();
    }
}
