//! Numerics for the one-dimensional harmonic oscillator with linear velocity
//! damping, built around its explicitly time-independent constant of motion.
//!
//! The crate covers three layers:
//!
//! * closed-form classical quantities — the constant of motion in all three
//!   damping regimes, its weak-dissipation expansion, the Lagrangian and
//!   generalized momentum derived from it, and action-angle coordinates
//!   ([`invariant`], [`action_angle`], [`checks`]);
//! * trajectory integration in (x, v) and (φ, J) with v = 0 crossing
//!   bookkeeping, since the constant is local per half-plane and jumps by a
//!   fixed factor at each crossing ([`dynamics`]);
//! * quantization on a truncated Fock basis via the velocity operator:
//!   sine/cosine/phase operator algebra, the interaction operator, first-
//!   and second-order perturbative corrections, and full diagonalization as
//!   the independent oracle ([`spectrum`]).
//!
//! [`validate`] bundles the cross-module invariant suite that the CLI
//! exposes as `dho validate`.

pub mod action_angle;
pub mod checks;
pub mod dynamics;
pub mod error;
pub mod invariant;
pub mod params;
pub mod rk;
pub mod spectrum;
pub mod validate;

pub use error::{DynamicsError, ModelError, SpectrumError};
pub use params::{
    classify_regime, ActionAngleState, DampingRegime, OscillatorParams, PhaseState,
};
