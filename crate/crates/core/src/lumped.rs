//! Peer Assembly lumped to a birth-death chain on the count `n1` of agents
//! holding opinion 1.
//!
//! With identical two-opinion agents on a complete graph of `N` nodes the
//! count is itself Markov with
//!
//! ```text
//! mu_j = (q21 + lambda1 (j-1)/(N-1)) (N-j+1)   1 <= j <= N    (j-1 -> j)
//! nu_j = (q12 + lambda2 (N-j-1)/(N-1)) (j+1)   0 <= j <= N-1  (j+1 -> j)
//! ```

use crate::error::{Error, Result};
use crate::model::{IntensitySchedule, ProbabilityVector};
use crate::uniformization::{self, Generator};

/// Birth-death chain on `{0, ..., N}`.
///
/// `birth[i]` is the rate `i -> i+1` and `death[i]` the rate `i+1 -> i`, so
/// `birth[j-1] = mu_j` and `death[j] = nu_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathChain {
    birth: Vec<f64>,
    death: Vec<f64>,
}

impl BirthDeathChain {
    pub fn new(birth: Vec<f64>, death: Vec<f64>) -> Result<Self> {
        if birth.is_empty() || birth.len() != death.len() {
            return Err(Error::InvalidParams(format!(
                "need equally many birth and death rates, got {} and {}",
                birth.len(),
                death.len()
            )));
        }
        if let Some(x) = birth.iter().chain(&death).find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidParams(format!("rate {x} is negative or not finite")));
        }
        Ok(Self { birth, death })
    }

    /// Lumped chain of the Peer Assembly with `n` agents.
    pub fn peer_assembly(n: usize, q12: f64, q21: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("peer assembly needs N >= 2, got {n}")));
        }
        if !(q12 > 0.0 && q21 > 0.0) || !q12.is_finite() || !q21.is_finite() {
            return Err(Error::InvalidParams(format!(
                "stand-alone rates must be positive, got q12={q12}, q21={q21}"
            )));
        }
        if !(lambda1 >= 0.0 && lambda2 >= 0.0) || !lambda1.is_finite() || !lambda2.is_finite() {
            return Err(Error::InvalidParams(format!(
                "intensities must be nonnegative, got lambda1={lambda1}, lambda2={lambda2}"
            )));
        }
        let nf = n as f64;
        let peers = nf - 1.0;
        let birth = (0..n)
            .map(|i| {
                let i = i as f64;
                (q21 + lambda1 * i / peers) * (nf - i)
            })
            .collect();
        let death = (0..n)
            .map(|j| {
                let j = j as f64;
                (q12 + lambda2 * (nf - j - 1.0) / peers) * (j + 1.0)
            })
            .collect();
        Self::new(birth, death)
    }

    /// Number of agents, i.e. the largest state.
    pub fn agents(&self) -> usize {
        self.birth.len()
    }

    /// Birth rate `mu_j`, `1 <= j <= N`.
    pub fn mu(&self, j: usize) -> f64 {
        self.birth[j - 1]
    }

    /// Death rate `nu_j`, `0 <= j <= N-1`.
    pub fn nu(&self, j: usize) -> f64 {
        self.death[j]
    }

    pub fn birth_rates(&self) -> &[f64] {
        &self.birth
    }

    pub fn death_rates(&self) -> &[f64] {
        &self.death
    }

    pub fn is_irreducible(&self) -> bool {
        self.birth.iter().chain(&self.death).all(|&x| x > 0.0)
    }

    /// Stationary distribution from the product formula
    /// `p_i / p_0 = prod_{k=1..i} mu_k / nu_{k-1}`, evaluated as cumulative
    /// log sums shifted by their maximum before exponentiation.
    pub fn steady_state(&self) -> Result<CountDistribution> {
        if let Some(i) = self.birth.iter().position(|&x| x <= 0.0) {
            return Err(Error::ReducibleChain(format!("birth rate mu_{} is zero", i + 1)));
        }
        if let Some(i) = self.death.iter().position(|&x| x <= 0.0) {
            return Err(Error::ReducibleChain(format!("death rate nu_{i} is zero")));
        }
        let mut logs = Vec::with_capacity(self.agents() + 1);
        let mut acc = 0.0;
        logs.push(acc);
        for (b, d) in self.birth.iter().zip(&self.death) {
            acc += b.ln() - d.ln();
            logs.push(acc);
        }
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        Ok(CountDistribution(ProbabilityVector::from_weights(w)?))
    }

    /// Transient count distributions on `grid`.
    pub fn transient(&self, p0: &CountDistribution, grid: &[f64]) -> Result<Vec<CountDistribution>> {
        let raw = uniformization::transient(self, p0.as_slice(), grid)?;
        Ok(raw
            .into_iter()
            .map(|p| CountDistribution(ProbabilityVector::from_solver(p)))
            .collect())
    }

    /// Max-norm of `p' Psi`.
    pub fn balance_residual(&self, p: &CountDistribution) -> f64 {
        let mut out = vec![0.0; self.dim()];
        self.left_mul(p.as_slice(), &mut out);
        out.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

impl Generator for BirthDeathChain {
    fn dim(&self) -> usize {
        self.birth.len() + 1
    }

    fn max_exit_rate(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let up = self.birth.get(i).copied().unwrap_or(0.0);
                let down = if i > 0 { self.death[i - 1] } else { 0.0 };
                up + down
            })
            .fold(0.0, f64::max)
    }

    fn left_mul(&self, x: &[f64], out: &mut [f64]) {
        let n = self.birth.len();
        for i in 0..=n {
            let up = if i < n { self.birth[i] } else { 0.0 };
            let down = if i > 0 { self.death[i - 1] } else { 0.0 };
            let mut v = -x[i] * (up + down);
            if i > 0 {
                v += x[i - 1] * self.birth[i - 1];
            }
            if i < n {
                v += x[i + 1] * self.death[i];
            }
            out[i] = v;
        }
    }
}

/// Distribution of a count over `{0, ..., N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution(ProbabilityVector);

impl CountDistribution {
    pub fn new(p: ProbabilityVector) -> Self {
        Self(p)
    }

    pub fn from_vec(p: Vec<f64>) -> Result<Self> {
        Ok(Self(ProbabilityVector::new(p)?))
    }

    pub fn agents(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.0
    }

    /// `(E[n/N], Var[n/N])`.
    pub fn moments(&self) -> (f64, f64) {
        let n = self.agents() as f64;
        let (m1, m2) = self
            .as_slice()
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(a, b), (i, &p)| {
                let i = i as f64;
                (a + i * p, b + i * i * p)
            });
        (m1 / n, (m2 - m1 * m1) / (n * n))
    }

    /// Lower quantile on the discrete CDF: smallest `i` with `F(i) >= q`.
    /// Cumulative sums are compared with a `1e-12` slack for round-off.
    pub fn percentile(&self, q: f64) -> Result<usize> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidQuantile(q));
        }
        let mut cdf = 0.0;
        for (i, &p) in self.as_slice().iter().enumerate() {
            cdf += p;
            if cdf >= q - 1e-12 {
                return Ok(i);
            }
        }
        Ok(self.agents())
    }

    /// Local maxima in the interior and at the ends, by index.
    pub fn modes(&self) -> Vec<usize> {
        let p = self.as_slice();
        let n = p.len();
        (0..n)
            .filter(|&i| {
                let left = i == 0 || p[i] > p[i - 1];
                let right = i + 1 == n || p[i] > p[i + 1];
                left && right
            })
            .collect()
    }
}

/// Initial count distributions used in the transient experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCounts {
    /// Independent agents, each holding opinion 1 with the given probability.
    Binomial(f64),
    Uniform,
    Deterministic(usize),
}

impl InitialCounts {
    pub fn distribution(&self, n: usize) -> Result<CountDistribution> {
        match *self {
            Self::Binomial(p) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParams(format!("binomial probability {p} outside [0, 1]")));
                }
                Ok(CountDistribution(ProbabilityVector::from_solver(binomial_pmf(n, p))))
            }
            Self::Uniform => Ok(CountDistribution(ProbabilityVector::uniform(n + 1))),
            Self::Deterministic(c) => {
                if c > n {
                    return Err(Error::InvalidParams(format!("initial count {c} exceeds N={n}")));
                }
                Ok(CountDistribution(ProbabilityVector::point_mass(n + 1, c)?))
            }
        }
    }
}

pub(crate) fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p == 0.0 || p == 1.0 {
        let mut v = vec![0.0; n + 1];
        v[if p == 0.0 { 0 } else { n }] = 1.0;
        return v;
    }
    let mut log_choose = 0.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            (log_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
        })
        .collect()
}

/// Stationary mean of `n1/N` under unbiased influence: `q21 / (q12 + q21)`,
/// independent of `lambda` and `N`.
pub fn uipa_mean(q12: f64, q21: f64) -> Result<f64> {
    check_rates(q12, q21)?;
    Ok(q21 / (q12 + q21))
}

/// Stationary variance of `n1/N` under unbiased influence:
/// `(s2 / N) (1 + lambda (N-1) / (lambda + (q12+q21)(N-1)))` with
/// `s2 = q12 q21 / (q12+q21)^2`.
pub fn uipa_variance(n: usize, q12: f64, q21: f64, lambda: f64) -> Result<f64> {
    check_rates(q12, q21)?;
    if n < 2 {
        return Err(Error::InvalidParams(format!("N must be at least 2, got {n}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParams(format!("lambda must be nonnegative, got {lambda}")));
    }
    let q = q12 + q21;
    let s2 = q12 * q21 / (q * q);
    let peers = n as f64 - 1.0;
    if lambda.is_infinite() {
        return Ok(s2 * (1.0 + peers) / n as f64);
    }
    Ok(s2 / n as f64 * (1.0 + lambda * peers / (lambda + q * peers)))
}

/// Stationary mean of `n1/N` for a three-agent Peer Assembly with arbitrary
/// intensities, in closed form with `q = q12 + q21` and
/// `phi = 2q^2 + 3q lambda1 + lambda1^2`.
pub fn three_agent_mean(q12: f64, q21: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_rates(q12, q21)?;
    let q = q12 + q21;
    let phi = 2.0 * q * q + 3.0 * q * lambda1 + lambda1 * lambda1;
    let dl = lambda2 - lambda1;
    let num = q21 * (phi + q12 * dl);
    let den = q * phi + q12 * (3.0 * q * dl + (lambda2 * lambda2 - lambda1 * lambda1));
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

fn check_rates(q12: f64, q21: f64) -> Result<()> {
    if !(q12 > 0.0 && q21 > 0.0 && q12.is_finite() && q21.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "stand-alone rates must be positive, got q12={q12}, q21={q21}"
        )));
    }
    Ok(())
}

/// Transient of the Peer Assembly under a stepwise intensity schedule; the
/// lumped chain is rebuilt at every breakpoint.
pub fn peer_assembly_transient_scheduled(
    n: usize,
    q12: f64,
    q21: f64,
    schedule: &IntensitySchedule,
    p0: &CountDistribution,
    grid: &[f64],
) -> Result<Vec<CountDistribution>> {
    if schedule.opinions() != 2 {
        return Err(Error::WrongOpinionCount {
            expected: 2,
            got: schedule.opinions(),
        });
    }
    if p0.agents() != n {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: p0.as_slice().len(),
        });
    }
    uniformization::check_grid(grid)?;
    let chains = schedule
        .segments()
        .map(|(_, l)| BirthDeathChain::peer_assembly(n, q12, q21, l.get(0), l.get(1)))
        .collect::<Result<Vec<_>>>()?;
    let mut p = p0.as_slice().to_vec();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        while now < t {
            let k = schedule.segment_index(now);
            let stop = schedule.end(k).min(t);
            uniformization::propagate(&chains[k], &mut p, stop - now);
            now = stop;
        }
        out.push(CountDistribution(ProbabilityVector::from_solver(p.clone())));
    }
    Ok(out)
}
