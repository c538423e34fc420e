//! Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with cubic Hermite
//! dense output. The flow here is smooth and non-stiff, so the classical
//! order-5 pair with a PI-free step controller is the right cost/accuracy
//! tradeoff.

use crate::error::DynamicsError;

const STAGES: usize = 7;

// Dormand-Prince 5(4) tableau
const C: [f64; STAGES] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; STAGES] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; STAGES] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One accepted integration step, retaining the endpoint derivatives for
/// Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolation of the solution inside [t0, t1].
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 1.0 - 3.0 * s2 + 2.0 * s3;
        let h10 = s - 2.0 * s2 + s3;
        let h01 = 3.0 * s2 - 2.0 * s3;
        let h11 = s3 - s2;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        y
    }
}

/// Tolerances and step limits of the adaptive driver.
#[derive(Debug, Clone, Copy)]
pub struct RkOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY, max_steps: 10_000_000 }
    }
}

/// Integrate dy/dt = f(t, y) over [t0, t1], returning every accepted step.
/// Error control uses the max norm of the scaled 5th-vs-4th order difference;
/// the step controller is the standard safety * err^(-1/5) rule.
pub fn integrate<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &RkOptions,
) -> Result<Vec<Step<N>>, DynamicsError> {
    if !(t1 > t0) {
        return Err(DynamicsError::InvalidInput(format!(
            "time span [{t0}, {t1}] must be increasing and non-degenerate"
        )));
    }
    let mut steps = Vec::new();
    let mut t = t0;
    let mut y = y0;
    let mut dy = f(t, &y);
    let mut h = initial_step(f, t, &y, &dy, opts);
    let h_min = 1e-14 * (t1 - t0).max(1.0);
    let mut k = [[0.0; N]; STAGES];
    let mut count = 0usize;

    while t < t1 {
        if count >= opts.max_steps {
            return Err(DynamicsError::StepFailure { t, h });
        }
        count += 1;
        h = h.min(opts.max_step).min(t1 - t);
        if h < h_min {
            return Err(DynamicsError::StepFailure { t, h });
        }

        k[0] = dy;
        for i in 1..STAGES {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(i) {
                let a = A[i][j];
                if a != 0.0 {
                    for n in 0..N {
                        yi[n] += h * a * kj[n];
                    }
                }
            }
            k[i] = f(t + C[i] * h, &yi);
        }

        let mut y5 = y;
        let mut err = [0.0; N];
        for (i, ki) in k.iter().enumerate() {
            for n in 0..N {
                y5[n] += h * B5[i] * ki[n];
                err[n] += h * (B5[i] - B4[i]) * ki[n];
            }
        }
        let mut err_norm: f64 = 0.0;
        for n in 0..N {
            let scale = opts.abs_tol + opts.rel_tol * y[n].abs().max(y5[n].abs());
            err_norm = err_norm.max((err[n] / scale).abs());
        }

        if err_norm <= 1.0 {
            // FSAL: stage 7 is f(t+h, y5)
            let f1 = k[STAGES - 1];
            steps.push(Step { t0: t, t1: t + h, y0: y, y1: y5, f0: dy, f1 });
            t += h;
            y = y5;
            dy = f1;
        }
        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(steps)
}

/// Conservative initial step from the first derivative magnitude.
fn initial_step<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    dy: &[f64; N],
    opts: &RkOptions,
) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for n in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y[n].abs();
        d0 = d0.max((y[n] / sc).abs());
        d1 = d1.max((dy[n] / sc).abs());
    }
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    // one Euler probe to bound the second derivative
    let mut y1 = *y;
    for n in 0..N {
        y1[n] += h0 * dy[n];
    }
    let f1 = f(t + h0, &y1);
    let mut d2: f64 = 0.0;
    for n in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y[n].abs();
        d2 = d2.max(((f1[n] - dy[n]) / sc).abs() / h0);
    }
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}

/// Locate a sign change of `event` within an accepted step by bisection on
/// the Hermite dense output, to absolute time tolerance `t_tol`.
pub fn refine_event<const N: usize>(
    step: &Step<N>,
    event: &dyn Fn(f64, &[f64; N]) -> f64,
    t_tol: f64,
) -> Option<f64> {
    let mut a = step.t0;
    let mut b = step.t1;
    let mut ga = event(a, &step.y0);
    let gb = event(b, &step.y1);
    if ga == 0.0 {
        return Some(a);
    }
    if gb == 0.0 {
        return Some(b);
    }
    if ga.signum() == gb.signum() {
        return None;
    }
    while b - a > t_tol {
        let m = 0.5 * (a + b);
        let gm = event(m, &step.interpolate(m));
        if gm == 0.0 {
            return Some(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}
