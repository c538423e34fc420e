//! Physical parameters and phase-space state types.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Relative tolerance on |ω_α² − ω²| below which the oscillator is
/// classified as critically damped. Exact float equality is meaningless;
/// near-critical states fall into the adjacent branch, whose formula is
/// continuous in the limit.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Parameters of the damped oscillator: m ẍ + 2mω_α ẋ + mω² x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Particle mass (kg), > 0.
    pub mass: f64,
    /// Natural angular frequency ω = √(k/m) (rad/s), > 0.
    pub omega: f64,
    /// Dissipation parameter ω_α = α/2m (rad/s), ≥ 0.
    pub omega_alpha: f64,
    /// Action quantum ħ (J·s), > 0. Defaults to 1 in tests.
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, omega_alpha: f64, hbar: f64) -> Result<Self, ModelError> {
        let p = Self { mass, omega, omega_alpha, hbar };
        p.validate()?;
        Ok(p)
    }

    /// Unit mass and ħ; the form used throughout the tests.
    pub fn simple(omega: f64, omega_alpha: f64) -> Result<Self, ModelError> {
        Self::new(1.0, omega, omega_alpha, 1.0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.mass > 0.0
            && self.mass.is_finite()
            && self.omega > 0.0
            && self.omega.is_finite()
            && self.omega_alpha >= 0.0
            && self.omega_alpha.is_finite()
            && self.hbar > 0.0
            && self.hbar.is_finite();
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParams {
                mass: self.mass,
                omega: self.omega,
                omega_alpha: self.omega_alpha,
                hbar: self.hbar,
            })
        }
    }

    /// Dissipative constant α = 2mω_α of the original equation of motion.
    pub fn alpha(&self) -> f64 {
        2.0 * self.mass * self.omega_alpha
    }

    /// Spring constant k = mω².
    pub fn spring_constant(&self) -> f64 {
        self.mass * self.omega * self.omega
    }

    /// √|ω² − ω_α²|, the reduced frequency of the under/overdamped branches.
    pub fn omega_reduced(&self) -> f64 {
        (self.omega * self.omega - self.omega_alpha * self.omega_alpha)
            .abs()
            .sqrt()
    }
}

/// A point (x, v) of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    /// Position (m).
    pub x: f64,
    /// Velocity (m/s).
    pub v: f64,
}

impl PhaseState {
    pub fn new(x: f64, v: f64) -> Result<Self, ModelError> {
        if x.is_finite() && v.is_finite() {
            Ok(Self { x, v })
        } else {
            Err(ModelError::NonFiniteState { x, v })
        }
    }

    pub fn is_origin(&self) -> bool {
        self.x == 0.0 && self.v == 0.0
    }
}

/// A point (φ, J) in action-angle coordinates. The angle is not reduced
/// modulo 2π: integrations track the winding explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionAngleState {
    /// Angle φ (rad).
    pub phi: f64,
    /// Action J (J·s), ≥ 0.
    pub j: f64,
}

impl ActionAngleState {
    pub fn new(phi: f64, j: f64) -> Result<Self, ModelError> {
        if !phi.is_finite() || !j.is_finite() || j < 0.0 {
            Err(ModelError::InvalidActionAngle { phi, j })
        } else {
            Ok(Self { phi, j })
        }
    }
}

/// Damping regime selecting the branch of the G function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DampingRegime {
    /// ω² > ω_α²: oscillatory decay, arctangent branch.
    Underdamped,
    /// ω² = ω_α² (within tolerance): rational branch.
    Critical,
    /// ω² < ω_α²: logarithmic branch.
    Overdamped,
}

/// Classify the damping regime of `params`. Equality is tested with
/// [`CRITICAL_TOLERANCE`] relative to ω².
pub fn classify_regime(params: &OscillatorParams) -> DampingRegime {
    let w2 = params.omega * params.omega;
    let wa2 = params.omega_alpha * params.omega_alpha;
    if (wa2 - w2).abs() <= CRITICAL_TOLERANCE * w2 {
        DampingRegime::Critical
    } else if w2 > wa2 {
        DampingRegime::Underdamped
    } else {
        DampingRegime::Overdamped
    }
}
