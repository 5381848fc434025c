//! `stretchlab`: writes figure data and reports as CSV/JSON and runs the
//! verification gate.
//!
//! Exit status: 0 when every in-run check passes, 1 when a check fails
//! (a `failure.json` report is written next to the artifacts), 2 for
//! invalid configuration.

mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const OUTPUT_ENV: &str = "STRETCHLAB_OUT";
const DEFAULT_OUTPUT: &str = "stretchlab-out";

#[derive(Debug, Parser)]
#[command(name = "stretchlab", version, about = "Classical mechanics as the high-entropy limit of quantum mechanics: figure data and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output root; each command writes into `<root>/<command>/`.
    /// Defaults to $STRETCHLAB_OUT, then ./stretchlab-out.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub units: UnitArgs,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct UnitArgs {
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub omega: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy–uncertainty curves S_C, S_Q and the λ-rescaled S_Q.
    Curves(CurvesArgs),
    /// Stretch one state by each λ: entropies, moments, negativity.
    StretchSweep(SweepArgs),
    /// Wigner and Husimi grids of a state and of its stretch.
    WignerDemo(DemoArgs),
    /// Planck, Rayleigh–Jeans and the small-β series.
    Blackbody(BlackbodyArgs),
    /// Quantum–classical distance of thermal Wigner functions.
    Thermal(ThermalArgs),
    /// Two-slit aliasing, depolarizing contraction and Bloch shells.
    Qubit(QubitArgs),
    /// Moyal vs Poisson evolution and the classicality ratio.
    Moyal(MoyalArgs),
    /// Run the invariant suite of every module.
    VerifyAll(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Curves(_) => "curves",
            Command::StretchSweep(_) => "stretch-sweep",
            Command::WignerDemo(_) => "wigner-demo",
            Command::Blackbody(_) => "blackbody",
            Command::Thermal(_) => "thermal",
            Command::Qubit(_) => "qubit",
            Command::Moyal(_) => "moyal",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Vacuum,
    Fock1,
    Coherent,
    Cat,
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WellKind {
    Harmonic,
    Quartic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StateArgs {
    #[arg(long, value_enum, default_value_t = StateKind::Fock1)]
    pub state: StateKind,
    /// Real amplitude of coherent and cat states.
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    /// Mean occupation of the thermal state.
    #[arg(long, default_value_t = 1.0)]
    pub nbar: f64,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurvesArgs {
    #[arg(long, default_value_t = 0.5)]
    pub sigma_min: f64,
    #[arg(long, default_value_t = 8.0)]
    pub sigma_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 10.0])]
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 4.0, 8.0])]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DemoArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BlackbodyArgs {
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub planck_h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k_b: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThermalArgs {
    #[arg(long, value_enum, default_value_t = WellKind::Quartic)]
    pub potential: WellKind,
    /// Quartic coefficient g in ½mω²x² + g x⁴.
    #[arg(long, default_value_t = 0.1)]
    pub g: f64,
    /// Strictly decreasing inverse temperatures.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 1.0, 0.7, 0.5, 0.35, 0.25])]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QubitArgs {
    #[arg(long, default_value_t = 0.3)]
    pub strength: f64,
    /// Directions sampled on each Bloch shell.
    #[arg(long, default_value_t = 60)]
    pub directions: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MoyalArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_enum, default_value_t = WellKind::Quartic)]
    pub potential: WellKind,
    #[arg(long, default_value_t = 0.1)]
    pub g: f64,
    /// Correction terms beyond the Poisson bracket (0–2).
    #[arg(long, default_value_t = 1)]
    pub n_corr: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Time step; defaults to the largest stable one.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 96)]
    pub grid: usize,
    /// Grid half-width in x, in units of the length scale.
    #[arg(long, default_value_t = 7.0)]
    pub half_x: f64,
    /// Grid half-width in p; wider than x because a stiff well throws the
    /// Wigner tails out in momentum.
    #[arg(long, default_value_t = 12.0)]
    pub half_p: f64,
    /// Write a snapshot CSV every this many steps (0: none).
    #[arg(long, default_value_t = 0)]
    pub stride: usize,
    /// Stretch factors for the classicality ratio.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0])]
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 48)]
    pub dim: usize,
    #[arg(long, default_value_t = 96)]
    pub grid: usize,
    /// Replace the amplifier's a† by a to check that the gate fails.
    #[arg(long)]
    pub inject_fault: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let root = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    match run::run(&cli, &root) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
