//! `dho` — simulate the damped oscillator, emit its phase-space figures and
//! quantized spectrum, and run the validation suite.

mod config;
mod output;

use clap::{Parser, Subcommand};

use dho_core::dynamics::{integrate_xv, orbit_j_of_phi};
use dho_core::error::{DynamicsError, SpectrumError};
use dho_core::params::PhaseState;
use dho_core::spectrum::diagonalize_k;
use dho_core::validate;

use config::{Overrides, RunConfig, SharedArgs};
use output::OrbitPoint;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    InvalidConfig(String),
    /// Exit code 3.
    Integration(String),
    /// Exit code 4.
    TruncationUnstable(String),
    /// Exit code 5.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::InvalidConfig(m) => write!(f, "invalid configuration: {m}"),
            CliError::Integration(m) => write!(f, "integration failed: {m}"),
            CliError::TruncationUnstable(m) => write!(f, "truncation unstable: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidConfig(_) => 2,
            CliError::Integration(_) => 3,
            CliError::TruncationUnstable(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

#[derive(Parser)]
#[command(name = "dho", about = "Damped harmonic oscillator: constant of motion, trajectories, and quantized spectrum", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the (x, v) flow and write the trajectory with its K values,
    /// branch indices, and v = 0 crossing table
    Simulate {
        #[command(flatten)]
        shared: SharedArgs,
        /// Integration time span (s); default is ten natural periods
        #[arg(long)]
        t_span: Option<f64>,
        /// Dense-output sampling interval (s)
        #[arg(long)]
        dt: Option<f64>,
        /// Initial position (m)
        #[arg(long)]
        x0: Option<f64>,
        /// Initial velocity (m/s)
        #[arg(long)]
        v0: Option<f64>,
    },
    /// Write the closed-form (φ, J) orbit over [0, 2π) together with the
    /// dissipation-free reference line
    Orbit {
        #[command(flatten)]
        shared: SharedArgs,
        /// Orbit constant J̃₀ (J s)
        #[arg(long)]
        j_tilde: Option<f64>,
        /// Number of φ samples on [0, 2π)
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Diagonalize the quantized constant of motion and write the per-level
    /// spectral table with perturbative corrections
    Spectrum {
        #[command(flatten)]
        shared: SharedArgs,
        /// Fock basis dimension
        #[arg(long)]
        n_max: Option<usize>,
        /// Phase-operator series truncation
        #[arg(long)]
        series_k_max: Option<usize>,
    },
    /// Run the full invariant suite and print one pass/fail line per check
    Validate {
        #[command(flatten)]
        shared: SharedArgs,
        /// Fock basis dimension
        #[arg(long)]
        n_max: Option<usize>,
        /// Phase-operator series truncation
        #[arg(long)]
        series_k_max: Option<usize>,
    },
}

fn no_overrides() -> Overrides {
    Overrides {
        t_span: None,
        dt: None,
        x0: None,
        v0: None,
        n_max: None,
        series_k_max: None,
        j_tilde: None,
        samples: None,
    }
}

fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let initial = PhaseState::new(cfg.x0, cfg.v0)
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let traj = integrate_xv(&initial, &cfg.params, (0.0, cfg.t_span), &cfg.integrator).map_err(
        |e| match e {
            DynamicsError::InvalidInput(m) => CliError::InvalidConfig(m),
            DynamicsError::Model(m) => CliError::InvalidConfig(m.to_string()),
            other => CliError::Integration(other.to_string()),
        },
    )?;
    output::emit_trajectory(cfg, &traj)
}

fn cmd_orbit(cfg: &RunConfig) -> Result<(), CliError> {
    let j_ref = cfg.j_tilde / cfg.params.omega;
    let points: Vec<OrbitPoint> = (0..cfg.samples)
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / cfg.samples as f64;
            OrbitPoint { phi, j: orbit_j_of_phi(phi, cfg.j_tilde, &cfg.params), j_reference: j_ref }
        })
        .collect();
    output::emit_orbit(cfg, &points)
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let report = diagonalize_k(&cfg.fock, &cfg.params).map_err(|e| match e {
        SpectrumError::TruncationUnstable { .. } => CliError::TruncationUnstable(e.to_string()),
        other => CliError::InvalidConfig(other.to_string()),
    })?;
    output::emit_spectrum(cfg, &report)
}

fn cmd_validate(cfg: &RunConfig) -> Result<bool, CliError> {
    let report = validate::run_all(&cfg.fock)
        .map_err(|e| CliError::Integration(e.to_string()))?;
    for c in &report.checks {
        let status = if c.diagnostic {
            "INFO"
        } else if c.passed {
            "PASS"
        } else {
            "FAIL"
        };
        if c.diagnostic {
            println!("{status} {name:<40} measured={m:>12.5e}", name = c.name, m = c.measured);
        } else {
            println!(
                "{status} {name:<40} measured={m:>12.5e} threshold={t:>9.1e}",
                name = c.name,
                m = c.measured,
                t = c.threshold
            );
        }
    }
    Ok(report.all_passed())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { shared, t_span, dt, x0, v0 } => {
            let over = Overrides { t_span, dt, x0, v0, ..no_overrides() };
            let cfg = RunConfig::resolve(&shared, over, "trajectory")?;
            cmd_simulate(&cfg)?;
            Ok(0)
        }
        Command::Orbit { shared, j_tilde, samples } => {
            let over = Overrides { j_tilde, samples, ..no_overrides() };
            let cfg = RunConfig::resolve(&shared, over, "orbit")?;
            cmd_orbit(&cfg)?;
            Ok(0)
        }
        Command::Spectrum { shared, n_max, series_k_max } => {
            let over = Overrides { n_max, series_k_max, ..no_overrides() };
            let cfg = RunConfig::resolve(&shared, over, "spectrum")?;
            cmd_spectrum(&cfg)?;
            Ok(0)
        }
        Command::Validate { shared, n_max, series_k_max } => {
            let over = Overrides { n_max, series_k_max, ..no_overrides() };
            let cfg = RunConfig::resolve(&shared, over, "validate")?;
            let all_passed = cmd_validate(&cfg)?;
            Ok(if all_passed { 0 } else { 1 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
