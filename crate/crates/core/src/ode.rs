//! Adaptive Dormand-Prince 5(4) integrator for small linear systems.

use crate::error::{Error, Result};
use crate::uniformization::check_grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            max_steps: 10_000_000,
        }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the autonomous system `y' = f(y)` and reports `y` at every time
/// of `grid` (nondecreasing, starting at or after 0). Steps are clipped to
/// land exactly on grid points.
pub fn integrate<F>(f: F, y0: &[f64], grid: &[f64], opts: OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64], &mut [f64]),
{
    check_grid(grid)?;
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h: f64 = 1e-3;
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(grid.len());
    f(&y, &mut k[0]);
    for &target in grid {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::InvalidParams("ODE step budget exhausted".into()));
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += step * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                f(&tmp, &mut k[s]);
            }
            let mut err: f64 = 0.0;
            for i in 0..n {
                let mut hi = y[i];
                let mut lo = y[i];
                for s in 0..7 {
                    hi += step * B5[s] * k[s][i];
                    lo += step * B4[s] * k[s][i];
                }
                y5[i] = hi;
                let scale = opts.atol + opts.rtol * y[i].abs().max(hi.abs());
                err = err.max(((hi - lo) / scale).abs());
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y5);
                // FSAL: the last stage is f at the accepted point.
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last || err > 1.0 {
                h = step * factor;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let grid = [0.0, 0.5, 1.0, 5.0];
        let out = integrate(|y, dy| dy[0] = -2.0 * y[0], &[1.0], &grid, OdeOptions::default()).unwrap();
        for (t, y) in grid.iter().zip(&out) {
            assert!((y[0] - (-2.0 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let out = integrate(
            |y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[1.0, 0.0],
            &grid,
            OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in grid.iter().zip(&out) {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t={t}");
        }
    }
}
