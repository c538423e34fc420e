//! Resolution of run parameters from flags, an optional JSON config file,
//! and built-in defaults, in that precedence order.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dho_core::dynamics::IntegratorConfig;
use dho_core::params::OscillatorParams;
use dho_core::spectrum::FockSpaceConfig;

use crate::CliError;

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Optional config-file values; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mass: Option<f64>,
    pub omega: Option<f64>,
    pub omega_alpha: Option<f64>,
    pub hbar: Option<f64>,
    pub t_span: Option<f64>,
    pub dt: Option<f64>,
    pub x0: Option<f64>,
    pub v0: Option<f64>,
    pub n_max: Option<usize>,
    pub series_k_max: Option<usize>,
    pub j_tilde: Option<f64>,
    pub samples: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::InvalidConfig(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::InvalidConfig(format!("bad config {}: {e}", p.display())))
            }
        }
    }
}

/// Shared numeric flags; `None` means "not given", so the config file and
/// defaults can fill in.
#[derive(Debug, Clone, clap::Args)]
pub struct SharedArgs {
    /// Particle mass (kg)
    #[arg(long)]
    pub mass: Option<f64>,
    /// Natural angular frequency (rad/s)
    #[arg(long)]
    pub omega: Option<f64>,
    /// Dissipation parameter (rad/s)
    #[arg(long)]
    pub omega_alpha: Option<f64>,
    /// Action quantum (J s)
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output path (defaults to a per-command name)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: OscillatorParams,
    pub integrator: IntegratorConfig,
    pub fock: FockSpaceConfig,
    pub t_span: f64,
    pub x0: f64,
    pub v0: f64,
    pub j_tilde: f64,
    pub samples: usize,
    pub format: Format,
    pub out: PathBuf,
}

pub struct Overrides {
    pub t_span: Option<f64>,
    pub dt: Option<f64>,
    pub x0: Option<f64>,
    pub v0: Option<f64>,
    pub n_max: Option<usize>,
    pub series_k_max: Option<usize>,
    pub j_tilde: Option<f64>,
    pub samples: Option<usize>,
}

impl RunConfig {
    pub fn resolve(
        shared: &SharedArgs,
        over: Overrides,
        default_out: &str,
    ) -> Result<Self, CliError> {
        let file = FileConfig::load(shared.config.as_deref())?;

        let mass = shared.mass.or(file.mass).unwrap_or(1.0);
        let omega = shared.omega.or(file.omega).unwrap_or(1.0);
        let omega_alpha = shared.omega_alpha.or(file.omega_alpha).unwrap_or(0.001);
        let hbar = shared.hbar.or(file.hbar).unwrap_or(1.0);
        let params = OscillatorParams::new(mass, omega, omega_alpha, hbar)
            .map_err(|e| CliError::InvalidConfig(e.to_string()))?;

        // ten periods of the natural oscillation
        let t_span = over
            .t_span
            .or(file.t_span)
            .unwrap_or(10.0 * 2.0 * std::f64::consts::PI / omega);
        let dt = over.dt.or(file.dt).unwrap_or(0.05);
        let integrator = IntegratorConfig { dense_output_dt: dt, max_step: 0.02, ..Default::default() };
        integrator
            .validate()
            .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
        if !(t_span > 0.0) || !t_span.is_finite() {
            return Err(CliError::InvalidConfig(format!("t_span must be positive, got {t_span}")));
        }

        let n_max = over.n_max.or(file.n_max).unwrap_or(256);
        let series_k_max = over.series_k_max.or(file.series_k_max).unwrap_or(64);
        let fock = FockSpaceConfig { n_max, series_k_max, ..Default::default() };
        fock.validate().map_err(|e| CliError::InvalidConfig(e.to_string()))?;

        let samples = over.samples.or(file.samples).unwrap_or(720);
        if samples < 2 {
            return Err(CliError::InvalidConfig(format!("need at least 2 samples, got {samples}")));
        }

        let format = shared.format;
        let out = shared.out.clone().unwrap_or_else(|| {
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            PathBuf::from(format!("{default_out}.{ext}"))
        });

        Ok(Self {
            params,
            integrator,
            fock,
            t_span,
            x0: over.x0.or(file.x0).unwrap_or(1.0),
            v0: over.v0.or(file.v0).unwrap_or(0.0),
            j_tilde: over.j_tilde.or(file.j_tilde).unwrap_or(1.0),
            samples,
            format,
            out,
        })
    }
}
