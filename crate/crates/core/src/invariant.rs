//! The constant of motion of the damped oscillator and its weak-dissipation
//! companions (constant, Lagrangian, generalized momentum).
//!
//! The dynamical system is
//!
//! ```text
//! x' = v,    v' = -omega^2 x - 2 omega_alpha v
//! ```
//!
//! and the general constant of motion is
//!
//! ```text
//! K(x,v) = (m/2) (v^2 + 2 omega_alpha x v + omega^2 x^2) exp(-2 omega_alpha G(v/x))
//! ```
//!
//! with G given per damping regime. K is a *local* constant: in the
//! underdamped regime the arctangent branch is fixed per half-plane v > 0 /
//! v < 0, so K is constant along any trajectory segment with v != 0 and
//! jumps by the factor exp(-2 pi omega_alpha / sqrt(omega^2 - omega_alpha^2))
//! at each v = 0 crossing.

use crate::error::ModelError;
use crate::params::{classify_regime, DampingRegime, OscillatorParams, PhaseState};

/// G evaluated together with the overdamped log-argument sign flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValue {
    /// The branch value of G (s).
    pub value: f64,
    /// Overdamped branch only: true when the log argument was negative and
    /// ln|.| was taken. Always false in the other regimes.
    pub log_sign_flipped: bool,
}

/// G(v/x, ω, ω_α) per damping regime; scalar value.
///
/// Underdamped branch convention: the arctangent of (ω_α + v/x)/ω̃ is taken
/// in the half-open interval [θ₀, θ₀+π), θ₀ = arctan(ω_α/ω̃), ω̃ = √(ω²−ω_α²).
/// This branch is continuous across x = 0 (where it takes the value π/2/ω̃)
/// and places the branch cut exactly on the line v = 0, so K built on it is
/// constant on each half-plane and jumps only at v = 0 crossings.
pub fn g_function(state: &PhaseState, params: &OscillatorParams) -> Result<f64, ModelError> {
    g_function_detailed(state, params).map(|g| g.value)
}

/// As [`g_function`], with the overdamped sign flag exposed.
pub fn g_function_detailed(
    state: &PhaseState,
    params: &OscillatorParams,
) -> Result<GValue, ModelError> {
    if state.is_origin() {
        return Err(ModelError::OriginUndefined);
    }
    let (x, v) = (state.x, state.v);
    let wa = params.omega_alpha;
    match classify_regime(params) {
        DampingRegime::Underdamped => {
            let wr = params.omega_reduced();
            let theta0 = (wa / wr).atan();
            let mut theta = (wa * x + v).atan2(wr * x);
            while theta < theta0 {
                theta += std::f64::consts::PI;
            }
            while theta >= theta0 + std::f64::consts::PI {
                theta -= std::f64::consts::PI;
            }
            Ok(GValue { value: theta / wr, log_sign_flipped: false })
        }
        DampingRegime::Critical => {
            // 1/(omega_alpha + v/x) = x/(omega_alpha x + v); finite 0 at x = 0
            Ok(GValue { value: x / (wa * x + v), log_sign_flipped: false })
        }
        DampingRegime::Overdamped => {
            let wr = params.omega_reduced();
            // (omega_alpha + v/x - wr)/(omega_alpha + v/x + wr), cleared of x
            let num = wa * x + v - wr * x;
            let den = wa * x + v + wr * x;
            let arg = num / den;
            let flipped = arg < 0.0;
            Ok(GValue {
                value: arg.abs().ln() / (2.0 * wr),
                log_sign_flipped: flipped,
            })
        }
    }
}

/// The constant of motion K_α(x, v), valid in all three regimes.
pub fn k_general(state: &PhaseState, params: &OscillatorParams) -> Result<f64, ModelError> {
    let g = g_function(state, params)?;
    let (m, w, wa) = (params.mass, params.omega, params.omega_alpha);
    let quad = state.v * state.v + 2.0 * wa * state.x * state.v + w * w * state.x * state.x;
    Ok(0.5 * m * quad * (-2.0 * wa * g).exp())
}

/// The weak-dissipation constant of motion, first order in ω_α:
///
/// ```text
/// K = m v^2/2 + m omega^2 x^2/2
///   + (m omega_alpha / omega) [ x v omega - (v^2 + omega^2 x^2) arctan(v/(omega x)) ]
/// ```
///
/// The arctangent is atan2(v, ωx), so the x → 0 limits are finite.
pub fn k_weak(state: &PhaseState, params: &OscillatorParams) -> Result<f64, ModelError> {
    if state.is_origin() {
        return Err(ModelError::OriginUndefined);
    }
    let (m, w, wa) = (params.mass, params.omega, params.omega_alpha);
    let (x, v) = (state.x, state.v);
    let phi = v.atan2(w * x);
    Ok(0.5 * m * v * v
        + 0.5 * m * w * w * x * x
        + (m * wa / w) * (x * v * w - (v * v + w * w * x * x) * phi))
}

/// The weak-dissipation Lagrangian:
///
/// ```text
/// L = m v^2/2 - m omega^2 x^2/2
///   + (m omega_alpha / omega) [ (omega^2 x^2 - v^2) arctan(v/(omega x))
///                               + omega x v ln((omega^2 x^2 + v^2)/(omega^2 x^2)) ]
/// ```
///
/// Undefined on the x = 0 axis (the log argument needs ω²x² > 0).
pub fn lagrangian_weak(state: &PhaseState, params: &OscillatorParams) -> Result<f64, ModelError> {
    if state.x == 0.0 {
        return Err(ModelError::AxisUndefined);
    }
    let (m, w, wa) = (params.mass, params.omega, params.omega_alpha);
    let (x, v) = (state.x, state.v);
    let phi = v.atan2(w * x);
    let ln = ((w * w * x * x + v * v) / (w * w * x * x)).ln();
    Ok(0.5 * m * v * v - 0.5 * m * w * w * x * x
        + (m * wa / w) * ((w * w * x * x - v * v) * phi + w * x * v * ln))
}

/// The generalized linear momentum p = ∂L/∂v of the weak-dissipation Lagrangian:
///
/// ```text
/// p = m v + (m omega_alpha / omega) [ omega x
///       + x omega ln((omega^2 x^2 + v^2)/(omega^2 x^2))
///       - 2 v arctan(v/(omega x)) ]
/// ```
pub fn momentum_weak(state: &PhaseState, params: &OscillatorParams) -> Result<f64, ModelError> {
    if state.x == 0.0 {
        return Err(ModelError::AxisUndefined);
    }
    let (m, w, wa) = (params.mass, params.omega, params.omega_alpha);
    let (x, v) = (state.x, state.v);
    let phi = v.atan2(w * x);
    let ln = ((w * w * x * x + v * v) / (w * w * x * x)).ln();
    Ok(m * v + (m * wa / w) * (w * x + x * w * ln - 2.0 * v * phi))
}
