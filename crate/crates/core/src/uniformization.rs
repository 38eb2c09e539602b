//! Transient solution of `p'(t) = G' p(t)` by uniformization.
//!
//! With `L >= max_i |G_ii|` the kernel `P = I + G/L` is stochastic and
//! `exp(G t) = sum_k Poisson(k; L t) P^k`. Long horizons are split into
//! sub-steps with `L h <= MAX_STEP_MASS` so the Poisson weights never
//! underflow; each sub-step sums terms until the remaining Poisson tail is
//! below `TAIL_TOL`.

use crate::error::{Error, Result};

const MAX_STEP_MASS: f64 = 16.0;
const TAIL_TOL: f64 = 1e-14;

/// A CTMC generator that can be applied from the left.
pub trait Generator {
    fn dim(&self) -> usize;

    /// Largest total exit rate `max_i -G_ii`.
    fn max_exit_rate(&self) -> f64;

    /// `out = x' G`, i.e. `out_j = sum_i x_i G_ij`. `out` is overwritten.
    fn left_mul(&self, x: &[f64], out: &mut [f64]);
}

/// Advances the distribution `p` by time `t >= 0` in place.
pub fn propagate<G: Generator + ?Sized>(gen: &G, p: &mut [f64], t: f64) {
    let rate = gen.max_exit_rate();
    if t <= 0.0 || rate <= 0.0 {
        return;
    }
    let lambda = rate * 1.0001;
    let steps = ((lambda * t) / MAX_STEP_MASS).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let n = p.len();
    let mut term = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut acc = vec![0.0; n];
    for _ in 0..steps {
        let mass = lambda * h;
        let mut w = (-mass).exp();
        let mut used = w;
        term.copy_from_slice(p);
        for (a, &x) in acc.iter_mut().zip(term.iter()) {
            *a = w * x;
        }
        let mut k = 0usize;
        while 1.0 - used > TAIL_TOL && k < 10_000 {
            k += 1;
            gen.left_mul(&term, &mut next);
            for (t, &g) in term.iter_mut().zip(next.iter()) {
                *t += g / lambda;
            }
            w *= mass / k as f64;
            used += w;
            for (a, &x) in acc.iter_mut().zip(term.iter()) {
                *a += w * x;
            }
        }
        for (dst, &a) in p.iter_mut().zip(acc.iter()) {
            *dst = (a / used).max(0.0);
        }
    }
}

/// Solutions at each time of a nondecreasing grid starting at or after 0.
pub fn transient<G: Generator + ?Sized>(gen: &G, p0: &[f64], grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    if p0.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: p0.len(),
        });
    }
    check_grid(grid)?;
    let mut p = p0.to_vec();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        propagate(gen, &mut p, t - now);
        now = t;
        out.push(p.clone());
    }
    Ok(out)
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(&t) = grid.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::InvalidGrid(format!("time {t} is negative or not finite")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid("grid must be nondecreasing".into()));
    }
    Ok(())
}

/// Dense row-major generator, mostly useful for small stand-alone chains.
#[derive(Debug, Clone)]
pub struct DenseGenerator {
    n: usize,
    g: Vec<f64>,
}

impl DenseGenerator {
    pub fn new(n: usize, g: Vec<f64>) -> Self {
        assert_eq!(g.len(), n * n);
        Self { n, g }
    }
}

impl Generator for DenseGenerator {
    fn dim(&self) -> usize {
        self.n
    }

    fn max_exit_rate(&self) -> f64 {
        (0..self.n).map(|i| -self.g[i * self.n + i]).fold(0.0, f64::max)
    }

    fn left_mul(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.g[i * self.n..(i + 1) * self.n];
            for (o, &g) in out.iter_mut().zip(row) {
                *o += xi * g;
            }
        }
    }
}

impl Generator for crate::model::RateMatrix {
    fn dim(&self) -> usize {
        self.opinions()
    }

    fn max_exit_rate(&self) -> f64 {
        crate::model::RateMatrix::max_exit_rate(self)
    }

    fn left_mul(&self, x: &[f64], out: &mut [f64]) {
        let m = self.opinions();
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..m).map(|i| x[i] * self.rate(i, j)).sum();
        }
    }
}
