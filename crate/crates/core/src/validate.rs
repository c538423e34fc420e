//! The cross-module invariant suite: every check returns its measured value
//! next to the threshold it is held to, so the validation command can print
//! one line per invariant. Diagnostic rows report known approximation gaps
//! of the printed closed forms without gating the suite.

use std::f64::consts::PI;

use crate::action_angle::{from_action_angle, k_action_angle, to_action_angle};
use crate::checks::{default_xi_ref, lagrangian_via_quadrature, pde_residual};
use crate::dynamics::{
    analytic_j, analytic_phi, integrate_action_angle, integrate_xv, invariance_drift,
    segments_between_crossings, IntegratorConfig,
};
use crate::error::DynamicsError;
use crate::invariant::{k_general, k_weak, lagrangian_weak, momentum_weak};
use crate::params::{ActionAngleState, OscillatorParams, PhaseState};
use crate::rk::{integrate, RkOptions};
use crate::spectrum::{
    build_j_op, build_k_interaction, build_phi_op, build_sine_cosine, commutator, diagonalize_k,
    first_order_shift, first_order_shift_closed, second_order_shift_sum, shifted_frequency,
    FockSpaceConfig, TRUNCATION_STABILITY_TOL,
};

/// Result of one invariant check.
#[derive(Debug, Clone)]
pub struct InvariantCheck {
    pub name: &'static str,
    /// The measured quantity (deviation, exponent error, ratio, ...).
    pub measured: f64,
    /// The bound `measured` is held to.
    pub threshold: f64,
    pub passed: bool,
    /// Diagnostic rows report a measurement without gating the suite.
    pub diagnostic: bool,
}

impl InvariantCheck {
    fn gate(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self { name, measured, threshold, passed: measured <= threshold, diagnostic: false }
    }

    fn diagnostic(name: &'static str, measured: f64) -> Self {
        Self { name, measured, threshold: f64::INFINITY, passed: true, diagnostic: true }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Selects the angle-equation right-hand side used by the coordinate
/// consistency check. The flipped variant is a self-test fixture: it
/// inverts the sign of the damping term, which the check must detect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleFlowVariant {
    Standard,
    FlippedDampingSign,
}

/// Deterministic quasi-random sweep of phase states away from the origin.
fn sweep_states(count: usize) -> Vec<PhaseState> {
    let golden = 0.618_033_988_749_894_9_f64;
    let sqrt2 = std::f64::consts::SQRT_2;
    (0..count)
        .map(|i| {
            let theta = 2.0 * PI * ((i as f64) * golden).fract();
            let r = 0.3 + 2.7 * ((i as f64) * sqrt2).fract();
            PhaseState { x: r * theta.cos(), v: r * theta.sin() }
        })
        .collect()
}

fn fig1_params() -> OscillatorParams {
    OscillatorParams::simple(1.0, 0.001).expect("valid")
}

/// Slope of the least-squares line through (ln x, ln y).
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

// ---------------------------------------------------------------- classical

/// α → 0 limit: |K_general − E_SHO| scales linearly in ω_α (log-log slope
/// within 10% of 1 over a thousand states).
pub fn check_alpha_limit_slope() -> InvariantCheck {
    let states = sweep_states(1000);
    let was = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3];
    let mut devs = Vec::new();
    for &wa in &was {
        let p = OscillatorParams::simple(1.0, wa).expect("valid");
        let d = states
            .iter()
            .map(|s| {
                let e = 0.5 * s.v * s.v + 0.5 * s.x * s.x;
                (k_general(s, &p).expect("away from origin") - e).abs()
            })
            .fold(0.0f64, f64::max);
        devs.push(d);
    }
    let slope = loglog_slope(&was, &devs);
    InvariantCheck::gate("alpha_to_zero_limit_slope", (slope - 1.0).abs(), 0.1)
}

/// PDE residual of K_general vanishes to FD accuracy on both half-planes.
pub fn check_pde_residual_general() -> InvariantCheck {
    let p = fig1_params();
    let k = |s: &PhaseState| k_general(s, &p);
    let mut worst: f64 = 0.0;
    for s in sweep_states(200) {
        if s.v.abs() < 0.05 {
            continue; // keep the FD stencil clear of the branch line
        }
        let r = pde_residual(&k, &s, &p).expect("interior state");
        worst = worst.max(r.abs());
    }
    InvariantCheck::gate("pde_residual_k_general", worst, 1e-6)
}

/// PDE residual of K_weak scales as ω_α² (measured exponent 2 ± 0.1).
pub fn check_pde_weak_exponent() -> InvariantCheck {
    let s = PhaseState { x: 1.0, v: 0.5 };
    let p1 = OscillatorParams::simple(1.0, 0.001).expect("valid");
    let p2 = OscillatorParams::simple(1.0, 0.002).expect("valid");
    let r1 = pde_residual(&|st: &PhaseState| k_weak(st, &p1), &s, &p1).expect("interior");
    let r2 = pde_residual(&|st: &PhaseState| k_weak(st, &p2), &s, &p2).expect("interior");
    let exponent = (r2 / r1).abs().log2();
    InvariantCheck::gate("pde_residual_k_weak_exponent", (exponent - 2.0).abs(), 0.1)
}

/// momentum_weak equals ∂(lagrangian_weak)/∂v by central differences.
pub fn check_momentum_partial() -> InvariantCheck {
    let p = fig1_params();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for s in sweep_states(200) {
        if s.x.abs() < 0.1 {
            continue;
        }
        let lp = lagrangian_weak(&PhaseState { x: s.x, v: s.v + h }, &p).expect("x != 0");
        let lm = lagrangian_weak(&PhaseState { x: s.x, v: s.v - h }, &p).expect("x != 0");
        let fd = (lp - lm) / (2.0 * h);
        let pm = momentum_weak(&s, &p).expect("x != 0");
        worst = worst.max((fd - pm).abs() / pm.abs().max(0.1));
    }
    InvariantCheck::gate("momentum_equals_dL_dv", worst, 1e-5)
}

/// Euler-Lagrange residual of the weak Lagrangian along the flow scales as
/// ω_α² (exponent 2 ± 0.1). Second derivatives use a wider step (1e-4) than
/// the first-derivative checks: the residual itself is O(ω_α²) ~ 1e-6 and a
/// 1e-5 step would put the FD roundoff at the same scale.
pub fn check_euler_lagrange_exponent() -> InvariantCheck {
    let el = |wa: f64| {
        let p = OscillatorParams::simple(1.0, wa).expect("valid");
        let (x, v): (f64, f64) = (0.8, 0.6);
        let h2 = 1e-4;
        let hx = h2 * (1.0 + x.abs());
        let hv = h2 * (1.0 + v.abs());
        let l = |x: f64, v: f64| lagrangian_weak(&PhaseState { x, v }, &p).expect("x != 0");
        let lvv = (l(x, v + hv) - 2.0 * l(x, v) + l(x, v - hv)) / (hv * hv);
        let lxv = (l(x + hx, v + hv) - l(x + hx, v - hv) - l(x - hx, v + hv)
            + l(x - hx, v - hv))
            / (4.0 * hx * hv);
        let lx = (l(x + hx, v) - l(x - hx, v)) / (2.0 * hx);
        let vdot = -p.omega * p.omega * x - 2.0 * p.omega_alpha * v;
        v * lxv + vdot * lvv - lx
    };
    let e1 = el(0.001);
    let e2 = el(0.002);
    let exponent = (e2 / e1).abs().log2();
    InvariantCheck::gate("euler_lagrange_residual_exponent", (exponent - 2.0).abs(), 0.1)
}

/// ∂²L/∂v² from the quadrature reconstruction matches the closed form.
pub fn check_quadrature_second_derivative() -> InvariantCheck {
    let p = fig1_params();
    let k = |s: &PhaseState| k_weak(s, &p);
    let s = PhaseState { x: 1.0, v: 0.5 };
    let h = 1e-3;
    let xi = default_xi_ref(&s, &p);
    let lq = |v: f64| {
        lagrangian_via_quadrature(&k, &PhaseState { x: s.x, v }, &p, xi).expect("valid path")
    };
    let lc = |v: f64| lagrangian_weak(&PhaseState { x: s.x, v }, &p).expect("x != 0");
    let d2q = (lq(s.v + h) - 2.0 * lq(s.v) + lq(s.v - h)) / (h * h);
    let d2c = (lc(s.v + h) - 2.0 * lc(s.v) + lc(s.v - h)) / (h * h);
    InvariantCheck::gate(
        "quadrature_vs_closed_form_d2L_dv2",
        (d2q - d2c).abs() / d2c.abs(),
        1e-5,
    )
}

/// Action-angle roundtrip at machine precision over a thousand states.
pub fn check_roundtrip() -> InvariantCheck {
    let p = fig1_params();
    let mut worst: f64 = 0.0;
    for s in sweep_states(1000) {
        let aa = to_action_angle(&s, &p).expect("away from origin");
        let b = from_action_angle(&aa, &p);
        worst = worst.max((b.x - s.x).abs().max((b.v - s.v).abs()) / (1.0 + s.x.abs() + s.v.abs()));
    }
    InvariantCheck::gate("action_angle_roundtrip", worst, 1e-13)
}

/// k_action_angle ∘ to_action_angle ≡ k_weak on the principal branch.
pub fn check_k_forms_agree() -> InvariantCheck {
    let p = fig1_params();
    let mut worst: f64 = 0.0;
    for s in sweep_states(1000) {
        if s.x < 0.05 {
            continue;
        }
        let aa = to_action_angle(&s, &p).expect("away from origin");
        let k1 = k_action_angle(&aa, &p);
        let k2 = k_weak(&s, &p).expect("away from origin");
        worst = worst.max((k1 - k2).abs() / k2.abs().max(1e-6));
    }
    InvariantCheck::gate("k_action_angle_matches_k_weak", worst, 1e-12)
}

// ----------------------------------------------------------------- dynamics

fn fig1_trajectory_config() -> IntegratorConfig {
    // max_step keeps the cubic Hermite interpolation error below the 1e-8
    // pointwise comparisons
    IntegratorConfig { max_step: 0.02, dense_output_dt: 0.05, ..Default::default() }
}

/// Invariance on the reference spiral: max K drift strictly between
/// consecutive v = 0 crossings over ten periods.
pub fn check_invariance_drift() -> Result<InvariantCheck, DynamicsError> {
    let p = fig1_params();
    let traj = integrate_xv(
        &PhaseState { x: 1.0, v: 0.0 },
        &p,
        (0.0, 20.0 * PI),
        &fig1_trajectory_config(),
    )?;
    let mut worst: f64 = 0.0;
    for seg in segments_between_crossings(&traj) {
        worst = worst.max(invariance_drift(&traj, seg)?);
    }
    Ok(InvariantCheck::gate("k_general_drift_between_crossings", worst, 1e-6))
}

/// Jump ratio at every v = 0 crossing against exp(−2πω_α/√(ω²−ω_α²)).
/// The sign is pinned: K decreases at each crossing.
pub fn check_crossing_jump_ratio() -> Result<InvariantCheck, DynamicsError> {
    let p = fig1_params();
    let traj = integrate_xv(
        &PhaseState { x: 1.0, v: 0.0 },
        &p,
        (0.0, 20.0 * PI),
        &fig1_trajectory_config(),
    )?;
    let predicted = (-2.0 * PI * p.omega_alpha / p.omega_reduced()).exp();
    let mut worst: f64 = 0.0;
    for c in &traj.crossings {
        worst = worst.max((c.k_after / c.k_before - predicted).abs() / predicted);
    }
    if traj.crossings.is_empty() {
        worst = f64::INFINITY;
    }
    Ok(InvariantCheck::gate("crossing_jump_ratio", worst, 1e-6))
}

/// Integrating in (x, v) then transforming agrees pointwise with direct
/// (φ, J) integration (angles modulo 2π). The flipped variant of the angle
/// flow must break this check.
pub fn check_coordinate_consistency(
    variant: AngleFlowVariant,
) -> Result<InvariantCheck, DynamicsError> {
    let p = fig1_params();
    let initial = PhaseState { x: 1.0, v: 0.0 };
    let cfg = fig1_trajectory_config();
    let txv = integrate_xv(&initial, &p, (0.0, 20.0 * PI), &cfg)?;

    let aa0 = to_action_angle(&initial, &p)?;
    let (w, wa) = (p.omega, p.omega_alpha);
    let sign = match variant {
        AngleFlowVariant::Standard => 1.0,
        AngleFlowVariant::FlippedDampingSign => -1.0,
    };
    let f = move |_t: f64, y: &[f64; 2]| {
        let s = y[0].sin();
        [-(w + sign * wa * (2.0 * y[0]).sin()), -4.0 * wa * y[1] * s * s]
    };
    let opts = RkOptions { rel_tol: cfg.rel_tol, abs_tol: cfg.abs_tol, max_step: cfg.max_step, ..Default::default() };
    let steps = integrate(&f, 0.0, [aa0.phi, aa0.j], 20.0 * PI, &opts)?;

    let mut worst: f64 = 0.0;
    let mut step_idx = 0;
    for s in &txv.samples {
        while step_idx + 1 < steps.len() && steps[step_idx].t1 < s.t {
            step_idx += 1;
        }
        let y = steps[step_idx].interpolate(s.t.clamp(steps[step_idx].t0, steps[step_idx].t1));
        let mapped = to_action_angle(&s.state, &p)?;
        let dphi = (mapped.phi - y[0]).rem_euclid(2.0 * PI);
        let dphi = dphi.min(2.0 * PI - dphi);
        worst = worst.max(dphi).max((mapped.j - y[1]).abs());
    }
    Ok(InvariantCheck::gate("coordinate_change_commutes", worst, 1e-8))
}

/// Monotone decay: mechanical energy and action never increase along the
/// dissipative flow.
pub fn check_monotone_decay() -> Result<InvariantCheck, DynamicsError> {
    let p = fig1_params();
    let cfg = IntegratorConfig::default();
    let txv = integrate_xv(&PhaseState { x: 1.0, v: 0.0 }, &p, (0.0, 20.0 * PI), &cfg)?;
    let mut worst: f64 = 0.0;
    let energy =
        |s: &PhaseState| 0.5 * p.mass * s.v * s.v + 0.5 * p.mass * p.omega * p.omega * s.x * s.x;
    for w in txv.samples.windows(2) {
        worst = worst.max(energy(&w[1].state) - energy(&w[0].state));
    }
    let taa = integrate_action_angle(
        &ActionAngleState { phi: 0.3, j: 0.7 },
        &p,
        (0.0, 20.0 * PI),
        &cfg,
    )?;
    for w in taa.samples.windows(2) {
        worst = worst.max(w[1].state.j - w[0].state.j);
    }
    Ok(InvariantCheck::gate("monotone_decay", worst.max(0.0), 1e-12))
}

/// Exact first integral of the (φ, J) flow, the oracle for the orbit shape:
/// J(φ) = C/(ω + ω_α sin 2φ) · exp[(2ω_α/ω̃) arctan((ω tan φ + ω_α)/ω̃)].
fn orbit_first_integral(phi: f64, params: &OscillatorParams) -> f64 {
    let (w, wa) = (params.omega, params.omega_alpha);
    let wr = params.omega_reduced();
    1.0 / (w + wa * (2.0 * phi).sin()) * ((2.0 * wa / wr) * ((w * phi.tan() + wa) / wr).atan()).exp()
}

/// Orbit consistency on a branch-matched segment: the integrated J(φ)
/// matches the exact first integral to 1e-6 after fitting one constant.
/// The printed orbit formula is compared the same way and its deviation is
/// returned as a diagnostic (it is an O(ω_α) approximation, not an exact
/// integral).
pub fn check_orbit_consistency() -> Result<(InvariantCheck, InvariantCheck), DynamicsError> {
    let p = fig1_params();
    // phi decreasing from 3.0; stop before the branch point at pi/2
    let cfg = IntegratorConfig { max_step: 0.02, dense_output_dt: 0.01, ..Default::default() };
    let traj = integrate_action_angle(&ActionAngleState { phi: 3.0, j: 1.0 }, &p, (0.0, 1.25), &cfg)?;

    let fit_dev = |model: &dyn Fn(f64) -> f64| -> f64 {
        let logs: Vec<f64> = traj
            .samples
            .iter()
            .map(|s| (s.state.j / model(s.state.phi)).ln())
            .collect();
        let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        traj.samples
            .iter()
            .map(|s| (c * model(s.state.phi) - s.state.j).abs() / s.state.j)
            .fold(0.0f64, f64::max)
    };

    let exact = fit_dev(&|phi| orbit_first_integral(phi, &p));
    let printed = fit_dev(&|phi| crate::dynamics::orbit_j_of_phi(phi, 1.0, &p));
    Ok((
        InvariantCheck::gate("orbit_matches_first_integral", exact, 1e-6),
        InvariantCheck::diagnostic("orbit_printed_formula_deviation", printed),
    ))
}

/// Deviation of the printed closed-form φ(t), J(t) from the integrated flow
/// over one period (diagnostic; the printed forms are first-order
/// approximations with a known phase mismatch).
pub fn check_analytic_solution_deviation() -> Result<(InvariantCheck, InvariantCheck), DynamicsError>
{
    let p = fig1_params();
    let a = 0.0;
    let phi0 = analytic_phi(0.0, a, &p)?;
    let cfg = IntegratorConfig { max_step: 0.02, dense_output_dt: 0.01, ..Default::default() };
    let traj = integrate_action_angle(&ActionAngleState { phi: phi0, j: 1.0 }, &p, (0.0, 2.0 * PI), &cfg)?;
    let mut dev_phi: f64 = 0.0;
    let mut dev_j: f64 = 0.0;
    for s in &traj.samples {
        let theta = p.omega * s.t + a;
        if theta.cos().abs() < 0.05 || (p.omega * s.t).cos().abs() < 0.05 {
            continue; // stay clear of the tangent poles
        }
        let pphi = analytic_phi(s.t, a, &p)?;
        let pj = analytic_j(s.t, 1.0, &p)?;
        let d = (pphi - s.state.phi).rem_euclid(PI);
        dev_phi = dev_phi.max(d.min(PI - d));
        dev_j = dev_j.max((pj - s.state.j).abs() / s.state.j);
    }
    Ok((
        InvariantCheck::diagnostic("analytic_phi_deviation", dev_phi),
        InvariantCheck::diagnostic("analytic_j_deviation", dev_j),
    ))
}

// ------------------------------------------------------------------ quantum

/// Hermiticity of every constructed operator inside the trusted window.
pub fn check_hermiticity(config: &FockSpaceConfig) -> Result<InvariantCheck, crate::error::SpectrumError> {
    let p = fig1_params();
    let (s, c) = build_sine_cosine(config)?;
    let j = build_j_op(config, &p)?;
    let (phi, _) = build_phi_op(config)?;
    let ki = build_k_interaction(config, &p)?;
    let worst = [&s, &c, &j, &phi, &ki]
        .iter()
        .map(|m| m.hermiticity_defect())
        .fold(0.0f64, f64::max);
    Ok(InvariantCheck::gate("operator_hermiticity", worst, 1e-12))
}

/// The stated commutators hold entrywise away from the truncation edge:
/// [a,a†] = 1, [C,N] = iS, [S,N] = −iC, [C,S] = (i/2)|0⟩⟨0|.
pub fn check_commutators(config: &FockSpaceConfig) -> Result<InvariantCheck, crate::error::SpectrumError> {
    use num_complex::Complex64;
    let p = fig1_params();
    let (a, ad, number) = crate::spectrum::build_ladder(config, &p)?;
    let (s, c) = build_sine_cosine(config)?;
    let edge = config.n_max - 2;
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;

    let aad = commutator(&a.entries, &ad.entries);
    for r in 0..edge.min(config.n_max - 1) {
        for q in 0..edge.min(config.n_max - 1) {
            let expected = if r == q { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((aad[(r, q)] - expected).norm());
        }
    }
    let cn = commutator(&c.entries, &number.entries);
    let sn = commutator(&s.entries, &number.entries);
    let cs = commutator(&c.entries, &s.entries);
    for r in 0..edge {
        for q in 0..edge {
            worst = worst.max((cn[(r, q)] - i * s.entries[(r, q)]).norm());
            worst = worst.max((sn[(r, q)] + i * c.entries[(r, q)]).norm());
            let expected = if r == 0 && q == 0 { Complex64::new(0.0, 0.5) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((cs[(r, q)] - expected).norm());
        }
    }
    Ok(InvariantCheck::gate("operator_commutators", worst, 1e-12))
}

/// ⟨n|φ̂|n⟩ = π/2 exactly in the trusted window.
pub fn check_phi_diagonal(config: &FockSpaceConfig) -> Result<InvariantCheck, crate::error::SpectrumError> {
    let (phi, _) = build_phi_op(config)?;
    let mut worst: f64 = 0.0;
    for n in 0..config.trusted_window() {
        let d = phi.entries[(n, n)] - num_complex::Complex64::new(std::f64::consts::FRAC_PI_2, 0.0);
        worst = worst.max(d.norm());
    }
    Ok(InvariantCheck::gate("phi_diagonal_half_pi", worst, 0.0))
}

/// First-order identity ⟨n|K_I|n⟩ = −ħω_απ(n+1/2) for n ≤ 20, and the
/// residual does not grow when the series truncation doubles. The identity
/// is exact by parity (odd cosine powers have structurally zero diagonals),
/// so both residuals sit at the roundoff floor; the halving requirement is
/// applied above that floor.
pub fn check_first_order_identity(
    config: &FockSpaceConfig,
) -> Result<(InvariantCheck, InvariantCheck), crate::error::SpectrumError> {
    const ROUNDOFF_FLOOR: f64 = 1e-12;
    let p = fig1_params();
    let residual = |cfg: &FockSpaceConfig| -> Result<f64, crate::error::SpectrumError> {
        let ki = build_k_interaction(cfg, &p)?;
        let mut worst: f64 = 0.0;
        for n in 0..=20 {
            let got = first_order_shift(n, &ki)?;
            let want = first_order_shift_closed(n, &p);
            worst = worst.max((got - want).abs() / want.abs());
        }
        Ok(worst)
    };
    let res = residual(config)?;
    // doubling series_k_max requires a wider basis to keep n <= 20 trusted
    let doubled = FockSpaceConfig {
        n_max: config.n_max.max(2 * (2 * (2 * config.series_k_max) + 2 + 21)),
        series_k_max: 2 * config.series_k_max,
        ..*config
    };
    let res2 = residual(&doubled)?;
    let halved = res2 <= (res / 2.0).max(ROUNDOFF_FLOOR);
    Ok((
        InvariantCheck::gate("first_order_identity", res, 1e-3),
        InvariantCheck {
            name: "first_order_residual_shrinks",
            measured: res2,
            threshold: (res / 2.0).max(ROUNDOFF_FLOOR),
            passed: halved,
            diagnostic: false,
        },
    ))
}

/// First-order-corrected level spacing equals ħ(ω − πω_α).
pub fn check_frequency_shift(config: &FockSpaceConfig) -> Result<InvariantCheck, crate::error::SpectrumError> {
    let p = fig1_params();
    let ki = build_k_interaction(config, &p)?;
    let wp = shifted_frequency(&p);
    let mut worst: f64 = 0.0;
    for n in 0..20 {
        let e = |m: usize| {
            p.hbar * p.omega * (m as f64 + 0.5) + first_order_shift(m, &ki).expect("in window")
        };
        let spacing = e(n + 1) - e(n);
        worst = worst.max((spacing - p.hbar * wp).abs() / (p.hbar * wp));
    }
    Ok(InvariantCheck::gate("first_order_level_spacing", worst, 1e-3))
}

/// Quadratic ω_α scaling of the second-order shift (log-ratio exponent).
pub fn check_second_order_scaling(config: &FockSpaceConfig) -> Result<InvariantCheck, crate::error::SpectrumError> {
    let p1 = OscillatorParams::simple(1.0, 0.001).expect("valid");
    let p2 = OscillatorParams::simple(1.0, 0.002).expect("valid");
    let k1 = build_k_interaction(config, &p1)?;
    let k2 = build_k_interaction(config, &p2)?;
    let mut worst: f64 = 0.0;
    for n in [0usize, 1, 5] {
        let v1 = second_order_shift_sum(n, &k1, &p1)?.value;
        let v2 = second_order_shift_sum(n, &k2, &p2)?.value;
        worst = worst.max(((v2 / v1).log2() - 2.0).abs());
    }
    Ok(InvariantCheck::gate("second_order_quadratic_scaling", worst, 1e-3))
}

/// Third-order consistency of the oracle: (e_diag − e_pert) grows eightfold
/// when ω_α doubles (ratio within 8 ± 20% for n ≤ 5).
pub fn check_oracle_ratio(config: &FockSpaceConfig) -> Result<InvariantCheck, crate::error::SpectrumError> {
    let r1 = diagonalize_k(config, &OscillatorParams::simple(1.0, 0.001).expect("valid"))?;
    let r2 = diagonalize_k(config, &OscillatorParams::simple(1.0, 0.002).expect("valid"))?;
    let mut worst: f64 = 0.0;
    for n in 0..=5 {
        let ratio = r2.rows[n].deviation / r1.rows[n].deviation;
        worst = worst.max((ratio - 8.0).abs());
    }
    Ok(InvariantCheck::gate("oracle_third_order_ratio", worst, 0.2 * 8.0))
}

/// Every reported eigenvalue moves by less than 1e-8 relative when the basis
/// doubles.
pub fn check_truncation_convergence(config: &FockSpaceConfig) -> Result<InvariantCheck, crate::error::SpectrumError> {
    let rep = diagonalize_k(config, &fig1_params())?;
    Ok(InvariantCheck::gate(
        "truncation_convergence",
        rep.max_doubling_change,
        TRUNCATION_STABILITY_TOL,
    ))
}

/// Run the full suite at the given spectrum configuration.
pub fn run_all(config: &FockSpaceConfig) -> Result<ValidationReport, crate::error::DynamicsError> {
    let mut checks = Vec::new();
    checks.push(check_alpha_limit_slope());
    checks.push(check_pde_residual_general());
    checks.push(check_pde_weak_exponent());
    checks.push(check_momentum_partial());
    checks.push(check_euler_lagrange_exponent());
    checks.push(check_quadrature_second_derivative());
    checks.push(check_roundtrip());
    checks.push(check_k_forms_agree());
    checks.push(check_invariance_drift()?);
    checks.push(check_crossing_jump_ratio()?);
    checks.push(check_coordinate_consistency(AngleFlowVariant::Standard)?);
    checks.push(check_monotone_decay()?);
    let (orbit, orbit_diag) = check_orbit_consistency()?;
    checks.push(orbit);
    checks.push(orbit_diag);
    let (dphi, dj) = check_analytic_solution_deviation()?;
    checks.push(dphi);
    checks.push(dj);

    let sp = |e: crate::error::SpectrumError| {
        crate::error::DynamicsError::InvalidInput(format!("spectrum check failed: {e}"))
    };
    checks.push(check_hermiticity(config).map_err(sp)?);
    checks.push(check_commutators(config).map_err(sp)?);
    checks.push(check_phi_diagonal(config).map_err(sp)?);
    let (first, shrink) = check_first_order_identity(config).map_err(sp)?;
    checks.push(first);
    checks.push(shrink);
    checks.push(check_frequency_shift(config).map_err(sp)?);
    checks.push(check_second_order_scaling(config).map_err(sp)?);
    checks.push(check_oracle_ratio(config).map_err(sp)?);
    checks.push(check_truncation_convergence(config).map_err(sp)?);
    Ok(ValidationReport { checks })
}
