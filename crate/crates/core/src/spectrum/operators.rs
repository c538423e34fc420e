//! Ladder, number, action, sine/cosine, and phase operators on the truncated
//! Fock basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{FockSpaceConfig, OperatorMatrix};
use crate::error::SpectrumError;
use crate::params::OscillatorParams;

fn czero(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_element(n, n, Complex64::new(0.0, 0.0))
}

/// Ladder and number operators: a|n⟩ = √n|n−1⟩, a† its adjoint, N = a†a.
pub fn build_ladder(
    config: &FockSpaceConfig,
    params: &OscillatorParams,
) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix), SpectrumError> {
    config.validate()?;
    let _ = params;
    let n_max = config.n_max;
    let w = config.trusted_window();
    let mut a = czero(n_max);
    for n in 1..n_max {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let a_dagger = a.adjoint();
    let number = &a_dagger * &a;
    Ok((
        OperatorMatrix::new(a, "a", w),
        OperatorMatrix::new(a_dagger, "a_dagger", w),
        OperatorMatrix::new(number, "number", w),
    ))
}

/// Action operator Ĵ = ħ(N̂ + 1/2), diagonal.
pub fn build_j_op(
    config: &FockSpaceConfig,
    params: &OscillatorParams,
) -> Result<OperatorMatrix, SpectrumError> {
    config.validate()?;
    let mut j = czero(config.n_max);
    for n in 0..config.n_max {
        j[(n, n)] = Complex64::new(params.hbar * (n as f64 + 0.5), 0.0);
    }
    Ok(OperatorMatrix::new(j, "J", config.trusted_window()))
}

/// Hermitian sine and cosine operators:
/// Ŝ|n⟩ = (i/2)(|n+1⟩ − |n−1⟩), Ĉ|n⟩ = (1/2)(|n+1⟩ + |n−1⟩),
/// with |−1⟩ ≡ 0 and |n_max⟩ dropped.
pub fn build_sine_cosine(
    config: &FockSpaceConfig,
) -> Result<(OperatorMatrix, OperatorMatrix), SpectrumError> {
    config.validate()?;
    let n_max = config.n_max;
    let w = config.trusted_window();
    let mut s = czero(n_max);
    let mut c = czero(n_max);
    for n in 0..n_max - 1 {
        // column n: S gets +i/2 at row n+1; column n+1: S gets -i/2 at row n
        s[(n + 1, n)] = Complex64::new(0.0, 0.5);
        s[(n, n + 1)] = Complex64::new(0.0, -0.5);
        c[(n + 1, n)] = Complex64::new(0.5, 0.0);
        c[(n, n + 1)] = Complex64::new(0.5, 0.0);
    }
    Ok((OperatorMatrix::new(s, "S", w), OperatorMatrix::new(c, "C", w)))
}

/// Convergence bookkeeping of the phase-operator series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesDiagnostics {
    /// Max-abs entry of the last retained term inside the trusted window.
    pub last_term_norm: f64,
    /// Estimate of the dropped tail: last term norm summed over the k⁻²
    /// decay of the remaining terms.
    pub tail_estimate: f64,
}

/// Phase operator
///
/// ```text
/// phi = pi/2 I - sum_{k=0}^{k_max} [(-1)^k/(2k+1)] binom(-1/2, k) C^(2k+1)
/// ```
///
/// The binomial is computed by the multiplicative recurrence b₀ = 1,
/// b_k = b_{k−1}·(−1/2 − k + 1)/k, which is overflow-free at k ~ 64. The
/// odd cosine powers are accumulated with the tridiagonal stencil of Ĉ, so
/// the diagonal of every series term is an exact structural zero and the
/// diagonal of the result is exactly π/2. The matrix is symmetrized after
/// truncation and the dropped-tail magnitude is recorded.
pub fn build_phi_op(
    config: &FockSpaceConfig,
) -> Result<(OperatorMatrix, SeriesDiagnostics), SpectrumError> {
    config.validate()?;
    let n_max = config.n_max;
    let window = config.trusted_window();

    // C as a real matrix; powers via the averaging stencil
    let mut c_power = DMatrix::<f64>::zeros(n_max, n_max);
    for n in 0..n_max - 1 {
        c_power[(n + 1, n)] = 0.5;
        c_power[(n, n + 1)] = 0.5;
    }
    let mut phi = DMatrix::<f64>::identity(n_max, n_max) * std::f64::consts::FRAC_PI_2;
    let mut binom = 1.0f64; // binom(-1/2, 0)
    let mut last_term_norm = 0.0f64;
    for k in 0..=config.series_k_max {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coef = sign / (2 * k + 1) as f64 * binom;
        phi -= &c_power * coef;
        last_term_norm = window_max_abs(&c_power, window) * coef.abs();
        if k < config.series_k_max {
            binom *= (-0.5 - k as f64) / (k as f64 + 1.0);
            c_power = mul_c_right(&mul_c_right(&c_power));
        }
    }
    if last_term_norm > config.series_tol {
        return Err(SpectrumError::SeriesNotConverged {
            last_term: last_term_norm,
            tol: config.series_tol,
        });
    }
    // tail of a ~k^-2 entry decay: sum_{j>k} ~ last * k
    let tail_estimate = last_term_norm * config.series_k_max as f64;

    let phi_c = DMatrix::from_fn(n_max, n_max, |i, j| Complex64::new(phi[(i, j)], 0.0));
    let op = OperatorMatrix::new(phi_c, "phi", window).symmetrized();
    Ok((op, SeriesDiagnostics { last_term_norm, tail_estimate }))
}

/// M·C for tridiagonal C with zero diagonal and 1/2 off-diagonals: a column
/// averaging stencil.
fn mul_c_right(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut acc = 0.0;
            if j > 0 {
                acc += 0.5 * m[(i, j - 1)];
            }
            if j + 1 < n {
                acc += 0.5 * m[(i, j + 1)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

fn window_max_abs(m: &DMatrix<f64>, window: usize) -> f64 {
    let w = window.min(m.nrows());
    let mut worst: f64 = 0.0;
    for i in 0..w {
        for j in 0..w {
            worst = worst.max(m[(i, j)].abs());
        }
    }
    worst
}

/// [A, B] = AB − BA.
pub fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn cfg(n_max: usize, k_max: usize) -> FockSpaceConfig {
        // the last-term norm scales like 1/k_max^2, so short test series
        // need a looser tolerance than the k_max = 64 default
        FockSpaceConfig { n_max, series_k_max: k_max, series_tol: 1e-2 }
    }

    fn unit_params() -> OscillatorParams {
        OscillatorParams::simple(1.0, 0.001).unwrap()
    }

    #[test]
    fn ladder_elements() {
        let c = cfg(32, 4);
        let (a, ad, n) = build_ladder(&c, &unit_params()).unwrap();
        assert_relative_eq!(a.entries[(0, 1)].re, 1.0);
        assert_relative_eq!(ad.entries[(2, 1)].re, 2.0f64.sqrt());
        assert_relative_eq!(n.entries[(5, 5)].re, 5.0);
        // [a, a+] = I away from the top edge
        let comm = commutator(&a.entries, &ad.entries);
        for i in 0..31 {
            assert_relative_eq!(comm[(i, i)].re, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn j_op_diagonal() {
        let c = cfg(32, 4);
        let j = build_j_op(&c, &unit_params()).unwrap();
        assert_relative_eq!(j.entries[(0, 0)].re, 0.5);
        assert_relative_eq!(j.entries[(3, 3)].re, 3.5);
    }

    #[test]
    fn sine_cosine_elements_and_hermiticity() {
        let c = cfg(32, 4);
        let (s, ch) = build_sine_cosine(&c).unwrap();
        assert_eq!(s.entries[(1, 0)], Complex64::new(0.0, 0.5));
        assert_eq!(ch.entries[(1, 0)], Complex64::new(0.5, 0.0));
        assert!(s.hermiticity_defect() < 1e-15);
        assert!(ch.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn sine_cosine_commutators() {
        let c = cfg(32, 4);
        let (s, ch) = build_sine_cosine(&c).unwrap();
        let (_, _, n) = build_ladder(&c, &unit_params()).unwrap();
        // [C, N] = iS, [S, N] = -iC away from the truncation edge
        let i = Complex64::new(0.0, 1.0);
        let cn = commutator(&ch.entries, &n.entries);
        let sn = commutator(&s.entries, &n.entries);
        for r in 0..30 {
            for cidx in 0..30 {
                assert!((cn[(r, cidx)] - i * s.entries[(r, cidx)]).norm() < 1e-13);
                assert!((sn[(r, cidx)] + i * ch.entries[(r, cidx)]).norm() < 1e-13);
            }
        }
        // [C, S] = (i/2)|0><0| away from the truncation edge
        let cs = commutator(&ch.entries, &s.entries);
        assert!((cs[(0, 0)] - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        for r in 0..30 {
            for cidx in 0..30 {
                if r == 0 && cidx == 0 {
                    continue;
                }
                assert!(cs[(r, cidx)].norm() < 1e-13, "[C,S][{r},{cidx}] = {}", cs[(r, cidx)]);
            }
        }
    }

    #[test]
    fn phi_diagonal_is_exactly_half_pi() {
        let c = cfg(96, 16);
        let (phi, _) = build_phi_op(&c).unwrap();
        for n in 0..c.trusted_window() {
            assert_eq!(phi.entries[(n, n)], Complex64::new(FRAC_PI_2, 0.0));
        }
        assert!(phi.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn phi_leading_off_diagonal() {
        // leading term of phi_{1,0} is -<1|C|0> = -1/2; the odd-power
        // corrections push it toward about -0.566
        let c = cfg(96, 16);
        let (phi, _) = build_phi_op(&c).unwrap();
        let v = phi.entries[(1, 0)].re;
        assert!(v < -0.5 && v > -0.6, "phi_10 = {v}");
    }

    #[test]
    fn phi_series_converges_monotonically() {
        // doubling the series truncation shrinks the change each time; the
        // tail decays only algebraically (~k^-2), so the deltas land near
        // 1e-4 .. 1e-5, not machine precision
        let mut vals = Vec::new();
        for k_max in [16usize, 32, 64, 128] {
            let n_max = (2 * k_max + 2 + 20).max(256);
            let (phi, _) = build_phi_op(&cfg(n_max, k_max)).unwrap();
            vals.push(phi.entries[(1, 0)].re);
        }
        let d1 = (vals[1] - vals[0]).abs();
        let d2 = (vals[2] - vals[1]).abs();
        let d3 = (vals[3] - vals[2]).abs();
        assert!(d2 < d1 && d3 < d2, "deltas not shrinking: {d1} {d2} {d3}");
        assert!(d3 < 1e-4, "64->128 delta {d3}");
    }

    #[test]
    fn phi_series_tolerance_violation_detected() {
        let c = FockSpaceConfig { series_tol: 1e-10, ..cfg(96, 16) };
        assert!(matches!(
            build_phi_op(&c),
            Err(SpectrumError::SeriesNotConverged { .. })
        ));
    }

    #[test]
    fn phi_series_diagnostics_recorded() {
        let (_, diag) = build_phi_op(&cfg(256, 64)).unwrap();
        assert!(diag.last_term_norm > 0.0 && diag.last_term_norm < 1e-3);
        assert!(diag.tail_estimate >= diag.last_term_norm);
    }
}
