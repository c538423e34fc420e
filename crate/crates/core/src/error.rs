//! Error types for the closed-form, dynamics, and spectrum layers.

use thiserror::Error;

/// Errors from the closed-form classical quantities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid oscillator parameters (mass={mass}, omega={omega}, omega_alpha={omega_alpha}, hbar={hbar})")]
    InvalidParams {
        mass: f64,
        omega: f64,
        omega_alpha: f64,
        hbar: f64,
    },
    #[error("non-finite phase state (x={x}, v={v})")]
    NonFiniteState { x: f64, v: f64 },
    #[error("invalid action-angle state (phi={phi}, j={j})")]
    InvalidActionAngle { phi: f64, j: f64 },
    #[error("quantity undefined at the phase-space origin")]
    OriginUndefined,
    #[error("quantity undefined on the x = 0 axis")]
    AxisUndefined,
    #[error("ln(cos phi) undefined for cos phi <= 0 (phi={phi})")]
    DomainError { phi: f64 },
    #[error("quadrature path [{from}, {to}] crosses xi = 0")]
    QuadraturePathInvalid { from: f64, to: f64 },
    #[error("adaptive quadrature failed to reach tolerance {tol} (best error estimate {best})")]
    NonConvergence { tol: f64, best: f64 },
    #[error("no root of the momentum relation in bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },
}

/// Errors from trajectory integration and the analytic solutions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("step size underflow at t={t} (h={h}); adaptivity cannot meet tolerance")]
    StepFailure { t: f64, h: f64 },
    #[error("analytic solution has a pole at t={t} (omega*t+a = pi/2 mod pi)")]
    PoleAt { t: f64 },
    #[error("segment [{start}, {end}] spans a v=0 crossing at t={t_cross}")]
    SegmentSpansCrossing { start: usize, end: usize, t_cross: f64 },
    #[error("invalid segment or time span: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the truncated Fock-space construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid Fock-space config: n_max={n_max} must exceed validity margin {margin}")]
    InvalidConfig { n_max: usize, margin: usize },
    #[error("phi-hat series not converged: last term norm {last_term} exceeds tolerance {tol}")]
    SeriesNotConverged { last_term: f64, tol: f64 },
    #[error("level n={n} outside trusted window {window}")]
    OutsideTrustedWindow { n: usize, window: usize },
    #[error("spectrum not truncation-stable: max relative change {change} when doubling n_max")]
    TruncationUnstable { change: f64 },
}
