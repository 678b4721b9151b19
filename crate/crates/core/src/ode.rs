//! Adaptive embedded Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! Used for the radial eigenfunction ODEs in log-derivative form, where the
//! state stays O(1)-smooth over many decades of radius. The integrator steps
//! from checkpoint to checkpoint so callers can sample solutions on
//! arbitrary (e.g. geometric) grids without dense output.

use crate::error::{Error, Result};

/// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
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
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// 5th-order weights (same as the last tableau row; FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Embedded 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive integrator with absolute/relative error control per component.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveRk {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveRk {
    fn default() -> Self {
        AdaptiveRk {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

impl AdaptiveRk {
    pub fn new(rtol: f64, atol: f64) -> Self {
        AdaptiveRk {
            rtol,
            atol,
            ..Default::default()
        }
    }

    /// Integrate y' = f(x, y) from `x0` through the strictly increasing
    /// `checkpoints`, returning the state at each checkpoint.
    pub fn run<const N: usize>(
        &self,
        f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
        x0: f64,
        y0: [f64; N],
        checkpoints: &[f64],
    ) -> Result<Vec<[f64; N]>> {
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        // initial step: a small fraction of the first span, bounded away
        // from underflow
        let first_span = checkpoints
            .first()
            .map(|&c| c - x0)
            .unwrap_or(1.0)
            .max(f64::MIN_POSITIVE);
        let mut h = (first_span * 0.01).max(1e-14 * x0.abs().max(1e-30));
        let mut steps = 0usize;

        for &target in checkpoints {
            if target <= x {
                return Err(Error::Precondition(
                    "ODE checkpoints must be strictly increasing".into(),
                ));
            }
            while x < target {
                if steps >= self.max_steps {
                    return Err(Error::SolveFailure {
                        r: x,
                        reason: format!("step budget {} exhausted", self.max_steps),
                    });
                }
                steps += 1;
                let mut step = h.min(target - x);
                let clipped = step < h;
                // one attempted step with error control
                let (y_new, err_norm, k_last) = loop {
                    let mut k = [[0.0; N]; 7];
                    k[0] = k1;
                    for stage in 0..6 {
                        let mut ys = y;
                        for (j, kj) in k.iter().enumerate().take(stage + 1) {
                            let a = A[stage][j];
                            if a != 0.0 {
                                for i in 0..N {
                                    ys[i] += step * a * kj[i];
                                }
                            }
                        }
                        k[stage + 1] = f(x + C[stage] * step, &ys);
                    }
                    let mut y5 = y;
                    let mut y4 = y;
                    for (j, kj) in k.iter().enumerate() {
                        for i in 0..N {
                            y5[i] += step * B5[j] * kj[i];
                            y4[i] += step * B4[j] * kj[i];
                        }
                    }
                    let mut err = 0.0f64;
                    for i in 0..N {
                        let scale = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                        let e = (y5[i] - y4[i]) / scale;
                        err += e * e;
                    }
                    let err_norm = (err / N as f64).sqrt();
                    if err_norm <= 1.0 || !err_norm.is_finite() && step <= 1e-14 * x.abs() {
                        break (y5, err_norm, k[6]);
                    }
                    // reject: shrink and retry
                    let fac = if err_norm.is_finite() {
                        (0.9 * err_norm.powf(-0.25)).clamp(0.1, 0.9)
                    } else {
                        0.1
                    };
                    step *= fac;
                    if step < 1e-15 * x.abs().max(1e-30) {
                        return Err(Error::SolveFailure {
                            r: x,
                            reason: "step size underflow".into(),
                        });
                    }
                    steps += 1;
                    if steps >= self.max_steps {
                        return Err(Error::SolveFailure {
                            r: x,
                            reason: format!("step budget {} exhausted", self.max_steps),
                        });
                    }
                };
                x += step;
                y = y_new;
                k1 = k_last; // FSAL
                if !y.iter().all(|v| v.is_finite()) {
                    return Err(Error::SolveFailure {
                        r: x,
                        reason: "non-finite state".into(),
                    });
                }
                // grow the working step only from genuinely adaptive steps
                if !clipped {
                    let fac = if err_norm > 0.0 {
                        (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                    } else {
                        5.0
                    };
                    h = step * fac;
                } else {
                    h = h.max(step);
                }
            }
            out.push(y);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_growth() {
        let rk = AdaptiveRk::default();
        let ys = rk
            .run(&|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &[1.0, 2.0, 5.0])
            .unwrap();
        for (y, x) in ys.iter().zip([1.0, 2.0, 5.0]) {
            assert_relative_eq!(y[0], f64::exp(x), max_relative = 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let rk = AdaptiveRk::new(1e-11, 1e-13);
        let ys = rk
            .run(
                &|_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                [1.0, 0.0],
                &[10.0 * std::f64::consts::PI],
            )
            .unwrap();
        assert_relative_eq!(ys[0][0], 1.0, epsilon = 1e-7);
        assert!(ys[0][1].abs() < 1e-7);
    }

    #[test]
    fn inverse_square_riccati_tracks_euler_solution() {
        // w' = -w^2 - 2w/r + 2/r^2 has the exact solution w = 1/r (n = 3,
        // v = 2, rho = 1); integrate across five decades
        let rk = AdaptiveRk::default();
        let grid: Vec<f64> = (1..=50).map(|i| 1e-4 * 10f64.powf(i as f64 / 10.0)).collect();
        let ys = rk
            .run(
                &|r, y: &[f64; 1]| [-y[0] * y[0] - 2.0 * y[0] / r + 2.0 / (r * r)],
                1e-4,
                [1e4],
                &grid,
            )
            .unwrap();
        for (y, r) in ys.iter().zip(&grid) {
            assert_relative_eq!(y[0], 1.0 / r, max_relative = 1e-9);
        }
    }

    #[test]
    fn non_increasing_checkpoints_rejected() {
        let rk = AdaptiveRk::default();
        assert!(rk
            .run(&|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &[1.0, 1.0])
            .is_err());
    }
}
