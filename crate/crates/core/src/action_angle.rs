//! Action-angle coordinates (φ, J) of the undamped oscillator and the
//! weak-dissipation quantities carried over to them.

use crate::error::ModelError;
use crate::params::{ActionAngleState, OscillatorParams, PhaseState};

/// (x, v) → (φ, J): φ = arctan(v/(ωx)) via atan2 (range (−π, π]),
/// J = (m/2ω)(v² + ω²x²).
pub fn to_action_angle(
    state: &PhaseState,
    params: &OscillatorParams,
) -> Result<ActionAngleState, ModelError> {
    if state.is_origin() {
        return Err(ModelError::OriginUndefined);
    }
    let w = params.omega;
    let phi = state.v.atan2(w * state.x);
    let j = (params.mass / (2.0 * w)) * (state.v * state.v + w * w * state.x * state.x);
    Ok(ActionAngleState { phi, j })
}

/// (φ, J) → (x, v): x = √(2J/mω) cos φ, v = √(2ωJ/m) sin φ. J = 0 maps to
/// the origin.
pub fn from_action_angle(aa: &ActionAngleState, params: &OscillatorParams) -> PhaseState {
    let (m, w) = (params.mass, params.omega);
    let x = (2.0 * aa.j / (m * w)).sqrt() * aa.phi.cos();
    let v = (2.0 * w * aa.j / m).sqrt() * aa.phi.sin();
    PhaseState { x, v }
}

/// Weak constant of motion in action-angle form: K = ωJ + ω_α J [sin 2φ − 2φ].
pub fn k_action_angle(aa: &ActionAngleState, params: &OscillatorParams) -> f64 {
    let (w, wa) = (params.omega, params.omega_alpha);
    w * aa.j + wa * aa.j * ((2.0 * aa.phi).sin() - 2.0 * aa.phi)
}

/// Weak Lagrangian in action-angle form:
///
/// L = −ωJ cos 2φ + 2ω_α J [cos 2φ − 4 sin 2φ · ln(cos φ)].
///
/// Requires cos φ > 0; no continuation is defined for cos φ ≤ 0.
pub fn lagrangian_action_angle(
    aa: &ActionAngleState,
    params: &OscillatorParams,
) -> Result<f64, ModelError> {
    let c = aa.phi.cos();
    if c <= 0.0 {
        return Err(ModelError::DomainError { phi: aa.phi });
    }
    let (w, wa) = (params.omega, params.omega_alpha);
    let s2 = (2.0 * aa.phi).sin();
    let c2 = (2.0 * aa.phi).cos();
    Ok(-w * aa.j * c2 + 2.0 * wa * aa.j * (c2 - 4.0 * s2 * c.ln()))
}

/// Weak generalized momentum in action-angle form:
///
/// p = √(2mωJ) sin φ + ω_α √(2mJ/ω) [cos φ (1 − 2 ln cos φ) − 2φ sin φ].
///
/// Requires cos φ > 0 for the logarithm.
pub fn momentum_action_angle(
    aa: &ActionAngleState,
    params: &OscillatorParams,
) -> Result<f64, ModelError> {
    let c = aa.phi.cos();
    if c <= 0.0 {
        return Err(ModelError::DomainError { phi: aa.phi });
    }
    let (m, w, wa) = (params.mass, params.omega, params.omega_alpha);
    let s = aa.phi.sin();
    Ok((2.0 * m * w * aa.j).sqrt() * s
        + wa * (2.0 * m * aa.j / w).sqrt() * (c * (1.0 - 2.0 * c.ln()) - 2.0 * aa.phi * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::k_weak;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn fig1() -> OscillatorParams {
        OscillatorParams::simple(1.0, 0.001).unwrap()
    }

    #[test]
    fn transform_examples() {
        let p = fig1();
        let aa = to_action_angle(&PhaseState { x: 1.0, v: 0.0 }, &p).unwrap();
        assert_eq!(aa.phi, 0.0);
        assert_relative_eq!(aa.j, 0.5, max_relative = 1e-15);

        let aa = to_action_angle(&PhaseState { x: 0.0, v: 1.0 }, &p).unwrap();
        assert_relative_eq!(aa.phi, FRAC_PI_2, max_relative = 1e-15);
        assert_relative_eq!(aa.j, 0.5, max_relative = 1e-15);

        let s = from_action_angle(&ActionAngleState { phi: 0.0, j: 0.5 }, &p);
        assert_relative_eq!(s.x, 1.0, max_relative = 1e-15);
        assert_eq!(s.v, 0.0);

        let s = from_action_angle(&ActionAngleState { phi: PI, j: 0.5 }, &p);
        assert_relative_eq!(s.x, -1.0, max_relative = 1e-15);
        assert_relative_eq!(s.v, 0.0, epsilon = 1e-15);

        let s = from_action_angle(&ActionAngleState { phi: 1.3, j: 0.0 }, &p);
        assert!(s.is_origin());
    }

    #[test]
    fn k_action_angle_examples() {
        let p = fig1();
        let k = k_action_angle(&ActionAngleState { phi: 0.0, j: 0.5 }, &p);
        assert_relative_eq!(k, 0.5, max_relative = 1e-15);

        // (phi=pi/4, J=1): 1 + 0.001 (1 - pi/2)
        let k = k_action_angle(&ActionAngleState { phi: FRAC_PI_4, j: 1.0 }, &p);
        assert_relative_eq!(k, 1.0 + 0.001 * (1.0 - FRAC_PI_2), max_relative = 1e-14);
        assert_relative_eq!(k, 0.9994292, max_relative = 1e-6);
    }

    #[test]
    fn lagrangian_momentum_domain() {
        let p = fig1();
        let bad = ActionAngleState { phi: 2.0, j: 1.0 }; // cos(2) < 0
        assert!(matches!(
            lagrangian_action_angle(&bad, &p),
            Err(ModelError::DomainError { .. })
        ));
        assert!(matches!(
            momentum_action_angle(&bad, &p),
            Err(ModelError::DomainError { .. })
        ));
        // at phi = 0: L = -wJ + 2 wa J, p = wa sqrt(2mJ/w)
        let aa = ActionAngleState { phi: 0.0, j: 0.5 };
        let l = lagrangian_action_angle(&aa, &p).unwrap();
        assert_relative_eq!(l, -0.5 + 2.0 * 0.001 * 0.5, max_relative = 1e-14);
        let pm = momentum_action_angle(&aa, &p).unwrap();
        assert_relative_eq!(pm, 0.001, max_relative = 1e-14);
    }

    #[test]
    fn momentum_matches_xv_form_on_principal_branch() {
        // p(phi, J) should agree with the (x, v)-form momentum for x > 0
        let p = fig1();
        for &(x, v) in &[(1.0, 0.5), (0.8, -0.3), (2.0, 1.0)] {
            let aa = to_action_angle(&PhaseState { x, v }, &p).unwrap();
            let p_aa = momentum_action_angle(&aa, &p).unwrap();
            let p_xv = crate::invariant::momentum_weak(&PhaseState { x, v }, &p).unwrap();
            assert_relative_eq!(p_aa, p_xv, max_relative = 1e-12);
        }
    }

    proptest! {
        // roundtrip identity to machine precision
        #[test]
        fn roundtrip_xv(x in -3.0f64..3.0, v in -3.0f64..3.0) {
            prop_assume!(x.hypot(v) > 1e-3);
            let p = fig1();
            let aa = to_action_angle(&PhaseState { x, v }, &p).unwrap();
            let back = from_action_angle(&aa, &p);
            prop_assert!((back.x - x).abs() <= 1e-12 * (1.0 + x.abs()));
            prop_assert!((back.v - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }

        // J is recovered by the forward transform
        #[test]
        fn roundtrip_j(phi in -3.0f64..3.0, j in 1e-3f64..10.0) {
            let p = fig1();
            let s = from_action_angle(&ActionAngleState { phi, j }, &p);
            let aa = to_action_angle(&s, &p).unwrap();
            prop_assert!((aa.j - j).abs() <= 1e-12 * j);
        }

        // K expressed in action-angle equals k_weak on the principal branch (x > 0)
        #[test]
        fn k_forms_agree(x in 0.05f64..3.0, v in -3.0f64..3.0) {
            let p = fig1();
            let s = PhaseState { x, v };
            let aa = to_action_angle(&s, &p).unwrap();
            let k1 = k_action_angle(&aa, &p);
            let k2 = k_weak(&s, &p).unwrap();
            prop_assert!((k1 - k2).abs() <= 1e-12 * k2.abs().max(1e-3));
        }
    }
}
