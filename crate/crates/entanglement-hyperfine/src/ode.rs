//! Adaptive Dormand-Prince 5(4) integrator for small autonomous-or-not systems.

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-12,
            atol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    Reached,
    /// The state left the domain accepted by the caller or stopped being finite.
    Stopped {
        at: f64,
    },
    StepUnderflow {
        at: f64,
    },
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
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
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction), updating `y`
/// in place. `admissible` is checked after every accepted step.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y: &mut [f64; N],
    t0: f64,
    t1: f64,
    tol: Tolerance,
    admissible: impl Fn(&[f64; N]) -> bool,
) -> Outcome {
    let span = t1 - t0;
    if span == 0.0 {
        return Outcome::Reached;
    }
    let dir = span.signum();
    let mut t = t0;
    let mut h = dir * (span.abs() * 1e-3).min(1e-2);
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, y);
    loop {
        if (t1 - t) * dir <= 0.0 {
            return Outcome::Reached;
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = *y;
            for (i, v) in ys.iter_mut().enumerate() {
                *v += h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = *y;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let d5: f64 = (0..7).map(|j| B5[j] * k[j][i]).sum();
            let d4: f64 = (0..7).map(|j| B4[j] * k[j][i]).sum();
            y5[i] += h * d5;
            let scale = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        if !err.is_finite() {
            h *= 0.1;
        } else if err <= 1.0 {
            t += h;
            *y = y5;
            if !y.iter().all(|v| v.is_finite()) || !admissible(y) {
                return Outcome::Stopped { at: t };
            }
            // First-same-as-last: the last stage is f at the new point.
            k[0] = k[6];
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Outcome::StepUnderflow { at: t };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_rotation() {
        let mut y = [1.0];
        assert_eq!(
            integrate(|_, y| [y[0]], &mut y, 0.0, 1.0, Tolerance::default(), |_| true),
            Outcome::Reached
        );
        assert!((y[0] - 1f64.exp()).abs() < 1e-11);

        let mut y = [1.0, 0.0];
        integrate(|_, y| [-y[1], y[0]], &mut y, 0.0, -3.0, Tolerance::default(), |_| true);
        assert!((y[0] - 3f64.cos()).abs() < 1e-10 && (y[1] + 3f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn stops_outside_domain() {
        let mut y = [1.0];
        let out = integrate(|_, _| [-1.0], &mut y, 0.0, 5.0, Tolerance::default(), |y| y[0] > 0.0);
        assert!(matches!(out, Outcome::Stopped { .. }));
    }
}
