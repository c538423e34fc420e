//! Consistency machinery around the constant of motion: the defining PDE
//! residual, the Lagrangian reconstructed by quadrature, and the implicit
//! Hamiltonian obtained by inverting the momentum relation numerically.

use crate::error::ModelError;
use crate::params::{OscillatorParams, PhaseState};

/// Central-difference step for first derivatives: h = 1e-5 (1 + |coordinate|).
pub const FD_STEP: f64 = 1e-5;

/// Convergence tolerance of the adaptive quadrature (absolute).
pub const QUAD_TOL: f64 = 1e-12;

/// Tolerance on v for the bracketed root solve of the momentum relation.
pub const ROOT_TOL: f64 = 1e-12;

/// An energy-valued function of the phase state, e.g. `k_general` or `k_weak`
/// with parameters bound.
pub type KEvaluator<'a> = &'a dyn Fn(&PhaseState) -> Result<f64, ModelError>;

/// Residual of the defining PDE of a constant of motion,
///
/// ```text
/// v dK/dx - (omega^2 x + 2 omega_alpha v) dK/dv
/// ```
///
/// by central differences. Zero (to truncation error) for an exact constant;
/// O(ω_α²) for the weak-dissipation form. The state must sit inside one
/// half-plane v > 0 or v < 0 so that the stencil does not straddle a branch
/// line.
pub fn pde_residual(
    k: KEvaluator,
    state: &PhaseState,
    params: &OscillatorParams,
) -> Result<f64, ModelError> {
    let hx = FD_STEP * (1.0 + state.x.abs());
    let hv = FD_STEP * (1.0 + state.v.abs());
    let kx = (k(&PhaseState { x: state.x + hx, v: state.v })?
        - k(&PhaseState { x: state.x - hx, v: state.v })?)
        / (2.0 * hx);
    let kv = (k(&PhaseState { x: state.x, v: state.v + hv })?
        - k(&PhaseState { x: state.x, v: state.v - hv })?)
        / (2.0 * hv);
    let w = params.omega;
    Ok(state.v * kx - (w * w * state.x + 2.0 * params.omega_alpha * state.v) * kv)
}

/// Lagrangian reconstructed from a constant of motion by the quadrature
///
/// ```text
/// L(x, v) = v * integral from xi_ref to v of K(x, xi)/xi^2 dxi
/// ```
///
/// The reference velocity fixes the gauge: the result differs from the
/// closed-form weak Lagrangian by a term c(x)·v that does not affect the
/// Euler-Lagrange dynamics, so comparisons are made on ∂²L/∂v².
///
/// `xi_ref` must be nonzero, on the same side of 0 as v, and the path
/// [xi_ref, v] must exclude 0.
pub fn lagrangian_via_quadrature(
    k: KEvaluator,
    state: &PhaseState,
    params: &OscillatorParams,
    xi_ref: f64,
) -> Result<f64, ModelError> {
    let _ = params;
    if state.x == 0.0 {
        return Err(ModelError::AxisUndefined);
    }
    let v = state.v;
    if xi_ref == 0.0 || v == 0.0 || (xi_ref > 0.0) != (v > 0.0) {
        return Err(ModelError::QuadraturePathInvalid { from: xi_ref, to: v });
    }
    let x = state.x;
    let integrand = |xi: f64| -> Result<f64, ModelError> {
        let kk = k(&PhaseState { x, v: xi })?;
        Ok(kk / (xi * xi))
    };
    let integral = adaptive_simpson(&integrand, xi_ref, v, QUAD_TOL, 40)?;
    Ok(v * integral)
}

/// Default quadrature reference ξ_ref = ω|x| with the sign of v, which keeps
/// the path clear of ξ = 0 and makes the gauge term reproducible.
pub fn default_xi_ref(state: &PhaseState, params: &OscillatorParams) -> f64 {
    params.omega * state.x.abs() * state.v.signum()
}

/// Result of the implicit Hamiltonian evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitHamiltonian {
    /// H(x, p) = K_weak(x, v(x, p)).
    pub energy: f64,
    /// The root v(x, p) of the momentum relation.
    pub v_root: f64,
    /// True when the bracket contained more than one root; the smallest-|v|
    /// root was returned.
    pub multiple_roots: bool,
}

/// The Hamiltonian defined implicitly through p = momentum_weak(x, v): solves
/// for v by bracketed bisection refined by a secant step, then evaluates the
/// weak constant of motion at (x, v). The momentum relation cannot be
/// inverted in closed form.
pub fn hamiltonian_implicit(
    x: f64,
    p_target: f64,
    params: &OscillatorParams,
    v_bracket: (f64, f64),
) -> Result<ImplicitHamiltonian, ModelError> {
    if x == 0.0 {
        return Err(ModelError::AxisUndefined);
    }
    let f = |v: f64| -> Result<f64, ModelError> {
        Ok(crate::invariant::momentum_weak(&PhaseState { x, v }, params)? - p_target)
    };
    let (lo, hi) = if v_bracket.0 <= v_bracket.1 {
        v_bracket
    } else {
        (v_bracket.1, v_bracket.0)
    };

    // scan for the sign changes; more than one means the relation is
    // non-monotonic over the bracket
    const SCAN: usize = 64;
    let mut sub_brackets = Vec::new();
    let mut prev_v = lo;
    let mut prev_f = f(lo)?;
    for i in 1..=SCAN {
        let v = lo + (hi - lo) * (i as f64) / (SCAN as f64);
        let fv = f(v)?;
        if prev_f == 0.0 || prev_f.signum() != fv.signum() {
            sub_brackets.push((prev_v, v));
        }
        prev_v = v;
        prev_f = fv;
    }
    if sub_brackets.is_empty() {
        return Err(ModelError::NoRootInBracket { lo, hi });
    }
    let multiple = sub_brackets.len() > 1;

    let mut best: Option<f64> = None;
    for (a, b) in sub_brackets {
        let root = bisect_secant(&f, a, b)?;
        if best.map_or(true, |r: f64| root.abs() < r.abs()) {
            best = Some(root);
        }
    }
    let v_root = best.expect("at least one bracket");
    let energy = crate::invariant::k_weak(&PhaseState { x, v: v_root }, params)?;
    Ok(ImplicitHamiltonian { energy, v_root, multiple_roots: multiple })
}

/// Bracketed bisection narrowed to a few ulps of ROOT_TOL, with a final
/// secant refinement.
fn bisect_secant(
    f: &dyn Fn(f64) -> Result<f64, ModelError>,
    mut a: f64,
    mut b: f64,
) -> Result<f64, ModelError> {
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    debug_assert!(fa.signum() != fb.signum());
    while (b - a).abs() > ROOT_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // one secant step inside the final interval
    let fa = f(a)?;
    let fb = f(b)?;
    if fb != fa {
        let s = a - fa * (b - a) / (fb - fa);
        if s >= a.min(b) && s <= a.max(b) {
            return Ok(s);
        }
    }
    Ok(0.5 * (a + b))
}

/// Recursive adaptive Simpson on a fallible integrand.
fn adaptive_simpson(
    f: &dyn Fn(f64) -> Result<f64, ModelError>,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64, ModelError> {
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> Result<f64, ModelError>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, ModelError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(ModelError::NonConvergence { tol, best: err.abs() / 15.0 });
    }
    let lv = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let rv = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(lv + rv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::{k_general, k_weak, lagrangian_weak, momentum_weak};
    use approx::assert_relative_eq;

    fn fig1() -> OscillatorParams {
        OscillatorParams::simple(1.0, 0.001).unwrap()
    }

    fn sho_energy(p: OscillatorParams) -> impl Fn(&PhaseState) -> Result<f64, ModelError> {
        move |s: &PhaseState| {
            Ok(0.5 * p.mass * s.v * s.v + 0.5 * p.mass * p.omega * p.omega * s.x * s.x)
        }
    }

    #[test]
    fn pde_residual_sho_energy_conserved() {
        let p = OscillatorParams::simple(1.0, 0.0).unwrap();
        let k = sho_energy(p);
        let r = pde_residual(&k, &PhaseState { x: 0.7, v: 0.4 }, &p).unwrap();
        assert!(r.abs() < 1e-10, "residual {r}");
    }

    #[test]
    fn pde_residual_k_general_vanishes() {
        let p = fig1();
        let k = |s: &PhaseState| k_general(s, &p);
        let r = pde_residual(&k, &PhaseState { x: 1.0, v: 0.5 }, &p).unwrap();
        assert!(r.abs() < 1e-6, "residual {r}");
        // lower half-plane too
        let r = pde_residual(&k, &PhaseState { x: -0.7, v: -0.4 }, &p).unwrap();
        assert!(r.abs() < 1e-6, "residual {r}");
    }

    #[test]
    fn pde_residual_k_weak_quadratic_in_dissipation() {
        let p1 = fig1();
        let p2 = OscillatorParams::simple(1.0, 0.002).unwrap();
        let s = PhaseState { x: 1.0, v: 0.5 };
        let k1 = |st: &PhaseState| k_weak(st, &p1);
        let k2 = |st: &PhaseState| k_weak(st, &p2);
        let r1 = pde_residual(&k1, &s, &p1).unwrap();
        let r2 = pde_residual(&k2, &s, &p2).unwrap();
        let ratio = r2 / r1;
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn quadrature_sho_example() {
        // closed form: v [m xi/2 - m omega^2 x^2/(2 xi)] from 1 to 2 = 1.5
        let p = OscillatorParams::simple(1.0, 0.0).unwrap();
        let k = sho_energy(p);
        let l = lagrangian_via_quadrature(&k, &PhaseState { x: 1.0, v: 2.0 }, &p, 1.0).unwrap();
        assert_relative_eq!(l, 1.5, max_relative = 1e-10);
    }

    #[test]
    fn quadrature_second_derivative_is_mass_for_sho() {
        let p = OscillatorParams::simple(1.0, 0.0).unwrap();
        let k = sho_energy(p);
        let s = PhaseState { x: 1.0, v: 0.8 };
        let h = 1e-3;
        let xi = default_xi_ref(&s, &p);
        let lp = lagrangian_via_quadrature(&k, &PhaseState { x: s.x, v: s.v + h }, &p, xi).unwrap();
        let l0 = lagrangian_via_quadrature(&k, &s, &p, xi).unwrap();
        let lm = lagrangian_via_quadrature(&k, &PhaseState { x: s.x, v: s.v - h }, &p, xi).unwrap();
        let d2 = (lp - 2.0 * l0 + lm) / (h * h);
        assert_relative_eq!(d2, p.mass, max_relative = 1e-6);
    }

    #[test]
    fn quadrature_matches_closed_form_second_derivative() {
        let p = fig1();
        let k = |s: &PhaseState| k_weak(s, &p);
        let s = PhaseState { x: 1.0, v: 0.5 };
        let h = 1e-3;
        let xi = default_xi_ref(&s, &p);
        let d2q = {
            let lp =
                lagrangian_via_quadrature(&k, &PhaseState { x: s.x, v: s.v + h }, &p, xi).unwrap();
            let l0 = lagrangian_via_quadrature(&k, &s, &p, xi).unwrap();
            let lm =
                lagrangian_via_quadrature(&k, &PhaseState { x: s.x, v: s.v - h }, &p, xi).unwrap();
            (lp - 2.0 * l0 + lm) / (h * h)
        };
        let d2c = {
            let lp = lagrangian_weak(&PhaseState { x: s.x, v: s.v + h }, &p).unwrap();
            let l0 = lagrangian_weak(&s, &p).unwrap();
            let lm = lagrangian_weak(&PhaseState { x: s.x, v: s.v - h }, &p).unwrap();
            (lp - 2.0 * l0 + lm) / (h * h)
        };
        assert_relative_eq!(d2q, d2c, max_relative = 1e-5);
    }

    #[test]
    fn quadrature_path_validation() {
        let p = fig1();
        let k = |s: &PhaseState| k_weak(s, &p);
        let r = lagrangian_via_quadrature(&k, &PhaseState { x: 1.0, v: 1.0 }, &p, -1.0);
        assert!(matches!(r, Err(ModelError::QuadraturePathInvalid { .. })));
        let r = lagrangian_via_quadrature(&k, &PhaseState { x: 0.0, v: 1.0 }, &p, 1.0);
        assert!(matches!(r, Err(ModelError::AxisUndefined)));
    }

    #[test]
    fn hamiltonian_closed_form_at_zero_dissipation() {
        // p = m v exactly, so H = p^2/2m + m omega^2 x^2 / 2
        let p = OscillatorParams::simple(1.0, 0.0).unwrap();
        let h = hamiltonian_implicit(1.0, 0.6, &p, (-2.0, 2.0)).unwrap();
        assert_relative_eq!(h.v_root, 0.6, max_relative = 1e-10);
        assert_relative_eq!(h.energy, 0.5 * 0.36 + 0.5, max_relative = 1e-10);
        assert!(!h.multiple_roots);
    }

    #[test]
    fn hamiltonian_example_root_at_rest() {
        // momentum_weak(1, 0) = 0.001 forces the root v = 0
        let p = fig1();
        let h = hamiltonian_implicit(1.0, 0.001, &p, (-0.1, 0.1)).unwrap();
        assert!(h.v_root.abs() < 1e-9, "v_root {}", h.v_root);
        assert_relative_eq!(h.energy, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn hamiltonian_roundtrip() {
        let p = fig1();
        let s = PhaseState { x: 1.0, v: 0.5 };
        let pm = momentum_weak(&s, &p).unwrap();
        let h = hamiltonian_implicit(1.0, pm, &p, (0.0, 1.0)).unwrap();
        assert_relative_eq!(h.v_root, 0.5, epsilon = 1e-10);
        assert_relative_eq!(h.energy, k_weak(&s, &p).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn hamiltonian_no_root() {
        let p = fig1();
        let r = hamiltonian_implicit(1.0, 50.0, &p, (-0.1, 0.1));
        assert!(matches!(r, Err(ModelError::NoRootInBracket { .. })));
    }
}
