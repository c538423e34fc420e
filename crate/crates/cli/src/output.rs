//! CSV and JSON emission. Floats are printed with 17 significant digits in
//! CSV so the text round-trips losslessly to the same double; the JSON
//! encoder uses shortest-roundtrip floats, which parse back to identical
//! values.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use dho_core::dynamics::{CrossingEvent, Sample, Trajectory};
use dho_core::params::{OscillatorParams, PhaseState};
use dho_core::spectrum::SpectrumReport;

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct Document<T: Serialize> {
    schema_version: u32,
    params: OscillatorParams,
    config: serde_json::Value,
    data: T,
}

fn write_json<T: Serialize>(path: &Path, params: &OscillatorParams, config: serde_json::Value, data: T) -> Result<(), CliError> {
    let doc = Document { schema_version: SCHEMA_VERSION, params: *params, config, data };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Io(format!("json encoding failed: {e}")))?;
    write_file(path, &(text + "\n"))
}

#[derive(Serialize)]
struct TrajectoryData<'a> {
    samples: &'a [Sample<PhaseState>],
    crossings: &'a [CrossingEvent],
}

pub fn emit_trajectory(cfg: &RunConfig, traj: &Trajectory<PhaseState>) -> Result<(), CliError> {
    match cfg.format {
        crate::config::Format::Json => {
            let config = serde_json::json!({
                "t_span": cfg.t_span,
                "dt": cfg.integrator.dense_output_dt,
                "x0": cfg.x0,
                "v0": cfg.v0,
            });
            write_json(
                &cfg.out,
                &cfg.params,
                config,
                TrajectoryData { samples: &traj.samples, crossings: &traj.crossings },
            )
        }
        crate::config::Format::Csv => {
            let mut s = String::from("t,x,v,k_general,branch_index\n");
            for row in &traj.samples {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt(row.t),
                    fmt(row.state.x),
                    fmt(row.state.v),
                    fmt(row.k_value),
                    row.branch_index
                ));
            }
            write_file(&cfg.out, &s)?;
            let mut c = String::from("t_cross,side,k_before,k_after\n");
            for ev in &traj.crossings {
                c.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt(ev.t_cross),
                    ev.side,
                    fmt(ev.k_before),
                    fmt(ev.k_after)
                ));
            }
            write_file(&cfg.out.with_extension("crossings.csv"), &c)
        }
    }
}

#[derive(Serialize)]
pub struct OrbitPoint {
    pub phi: f64,
    pub j: f64,
    /// The dissipation-free reference line J = J̃₀/ω.
    pub j_reference: f64,
}

pub fn emit_orbit(cfg: &RunConfig, points: &[OrbitPoint]) -> Result<(), CliError> {
    match cfg.format {
        crate::config::Format::Json => {
            let config = serde_json::json!({
                "j_tilde": cfg.j_tilde,
                "samples": cfg.samples,
            });
            write_json(&cfg.out, &cfg.params, config, points)
        }
        crate::config::Format::Csv => {
            let mut s = String::from("phi,j,j_reference\n");
            for p in points {
                s.push_str(&format!("{},{},{}\n", fmt(p.phi), fmt(p.j), fmt(p.j_reference)));
            }
            write_file(&cfg.out, &s)
        }
    }
}

pub fn emit_spectrum(cfg: &RunConfig, report: &SpectrumReport) -> Result<(), CliError> {
    match cfg.format {
        crate::config::Format::Json => {
            let config = serde_json::to_value(report.config)
                .map_err(|e| CliError::Io(format!("json encoding failed: {e}")))?;
            write_json(&cfg.out, &report.params, config, report)
        }
        crate::config::Format::Csv => {
            let mut s = String::from("n,e0,de1,de2,e_pert,e_diag,deviation,stable\n");
            for r in &report.rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.n,
                    fmt(r.e0),
                    fmt(r.de1),
                    fmt(r.de2),
                    fmt(r.e_pert),
                    fmt(r.e_diag),
                    fmt(r.deviation),
                    r.stable
                ));
            }
            write_file(&cfg.out, &s)
        }
    }
}
