//! `galmax` command-line runner.
//!
//! Every subcommand reads an optional TOML config (`--scenario`), applies flag
//! and environment overrides on top of it, writes its CSV or dump outputs into
//! `--out`, and finishes with `manifest.json` plus `config.toml`, the
//! effective config that regenerates the run. Failures exit nonzero and emit a
//! one-line JSON error record on stderr (also written to `<out>/error.json`).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use galmax::scenario::Units;
use galmax::stepper::System;
use galmax::vec3::Vec3;

#[derive(Debug, Parser)]
#[command(name = "galmax", version, about = "Modified and classical Maxwell solvers with Galilean-boost diagnostics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; each has a `GALMAX_` environment mirror.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Subcommand config file (TOML).
    #[arg(long, global = true, env = "GALMAX_SCENARIO", value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Output directory [default: `output.dir` of the scenario, else `out`].
    #[arg(long, global = true, env = "GALMAX_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for randomised inputs; overrides the config.
    #[arg(long, global = true, env = "GALMAX_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for field operations [default: all cores].
    #[arg(long, global = true, env = "GALMAX_THREADS")]
    pub threads: Option<usize>,
    /// Unit system; overrides the config.
    #[arg(long, global = true, env = "GALMAX_UNITS", value_enum)]
    pub units: Option<UnitsArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Si,
    Normalized,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Si => Units::Si,
            UnitsArg::Normalized => Units::Normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Classical,
    Modified,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Classical => System::Classical,
            SystemArg::Modified => System::Modified,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Advance a scenario and write field snapshots.
    Simulate(SimulateArgs),
    /// Boost stored trajectories and report equation residuals.
    CheckInvariance(CheckInvarianceArgs),
    /// Verify the six vector identities on random trigonometric fields.
    Identities(IdentitiesArgs),
    /// Compare four force predictions for two charges seen by a moving observer.
    TwoCharge(TwoChargeArgs),
    /// Evaluate point-charge field kernels at sample points.
    Kernels(KernelsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::CheckInvariance(_) => "check-invariance",
            Command::Identities(_) => "identities",
            Command::TwoCharge(_) => "two-charge",
            Command::Kernels(_) => "kernels",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Override `system`.
    #[arg(long, env = "GALMAX_SYSTEM", value_enum)]
    pub system: Option<SystemArg>,
    /// Override `solver.steps`.
    #[arg(long, env = "GALMAX_STEPS")]
    pub steps: Option<usize>,
    /// Override `output.every`.
    #[arg(long, env = "GALMAX_EVERY")]
    pub every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckInvarianceArgs {
    /// Trajectory directory written by `simulate`; repeat once per refinement level.
    #[arg(long = "trajectory", env = "GALMAX_TRAJECTORY", value_delimiter = ';', value_name = "DIR")]
    pub trajectories: Vec<PathBuf>,
    /// Frame velocity `vx,vy,vz`.
    #[arg(long, env = "GALMAX_V0", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub v0: Option<Vec3>,
    /// Equations to check: the modified system, or the classical one (expected to fail).
    #[arg(long, env = "GALMAX_LAW", value_enum)]
    pub law: Option<SystemArg>,
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    /// Largest wavenumber of the random trigonometric fields.
    #[arg(long, env = "GALMAX_DEGREE")]
    pub degree: Option<i32>,
    /// Grid sizes for the discrete refinement study, e.g. `16,32,64`.
    #[arg(long, env = "GALMAX_LEVELS", value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// Grid size for the analytic check.
    #[arg(long, env = "GALMAX_ANALYTIC_N")]
    pub analytic_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TwoChargeArgs {
    /// Charge at `A`.
    #[arg(long, env = "GALMAX_Q1", allow_hyphen_values = true)]
    pub q1: Option<f64>,
    /// Charge at `B`, the one the force acts on.
    #[arg(long, env = "GALMAX_Q2", allow_hyphen_values = true)]
    pub q2: Option<f64>,
    /// Position `A` as `x,y,z`.
    #[arg(long, env = "GALMAX_A", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub a: Option<Vec3>,
    /// Position `B` as `x,y,z`.
    #[arg(long, env = "GALMAX_B", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub b: Option<Vec3>,
    /// Observer velocity `x,y,z`.
    #[arg(long, env = "GALMAX_U", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub u: Option<Vec3>,
}

#[derive(Debug, Args)]
pub struct KernelsArgs {
    /// Source charge.
    #[arg(long, env = "GALMAX_Q", allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Source position `x,y,z`.
    #[arg(long, env = "GALMAX_POSITION", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub position: Option<Vec3>,
    /// Source velocity `x,y,z`.
    #[arg(long, env = "GALMAX_VELOCITY", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub velocity: Option<Vec3>,
    /// Evaluation point `x,y,z`; repeat for several points.
    #[arg(long = "point", env = "GALMAX_POINT", value_delimiter = ';', value_parser = parse_vec3, allow_hyphen_values = true)]
    pub points: Vec<Vec3>,
    /// Minimum source distance in metres (or length units).
    #[arg(long, env = "GALMAX_CUTOFF")]
    pub cutoff: Option<f64>,
}

pub fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected `x,y,z`, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let out = cli.global.out.clone();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            output::report_error(name, out.as_deref(), &e);
            ExitCode::from(output::exit_code(&e))
        }
    }
}
