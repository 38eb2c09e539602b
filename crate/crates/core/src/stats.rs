//! Estimators over simulated paths: time-weighted occupancies, moments of
//! `n_j/N`, and batch-means standard errors.
//!
//! Everything is built on one fold: the observation window is cut into equal
//! batches and, per batch, the fraction of time spent in each value of some
//! discrete key (a count, a master state) is accumulated exactly from the
//! piecewise-constant path.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lumped::CountDistribution;
use crate::master::MasterSpace;
use crate::ssa::{Ensemble, SamplePath};

pub const DEFAULT_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    /// Number of batches behind the standard error.
    pub samples: usize,
}

/// Time-average mean and variance of `n_j/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: EstimateWithError,
    pub variance: EstimateWithError,
}

/// Occupancy probabilities with per-entry batch-means errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Occupancy {
    pub p: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples: usize,
}

/// Estimated count distribution with per-bin errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCounts {
    pub distribution: CountDistribution,
    pub std_error: Vec<f64>,
    pub samples: usize,
}

/// `10 / (q12 + q21)`, ten relaxation times of a stand-alone agent.
pub fn default_burn_in(q12: f64, q21: f64) -> f64 {
    10.0 / (q12 + q21)
}

/// Observation window `[start, end]` split into `batches` equal parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
    pub batches: usize,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Self {
        Self {
            start,
            end,
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches;
        self
    }

    fn check(&self, path_end: f64) -> Result<()> {
        if !(self.start >= 0.0) || !(self.end > self.start) {
            return Err(Error::WindowTooShort(format!(
                "window [{}, {}] is empty",
                self.start, self.end
            )));
        }
        if self.batches < 2 {
            return Err(Error::WindowTooShort(format!(
                "need at least 2 batches, got {}",
                self.batches
            )));
        }
        if self.end > path_end {
            return Err(Error::GridOutOfRange {
                t: self.end,
                t_end: path_end,
            });
        }
        Ok(())
    }
}

/// Per-batch time fractions spent at each value of `key(state, counts)`,
/// which must lie in `0..keys`.
pub fn batch_occupancy<K>(path: &SamplePath, window: Window, keys: usize, key: K) -> Result<Vec<Vec<f64>>>
where
    K: Fn(&[usize], &[usize]) -> usize,
{
    window.check(path.t_end)?;
    let b = window.batches;
    let len = (window.end - window.start) / b as f64;
    let mut edges: Vec<f64> = (0..b).map(|i| window.start + i as f64 * len).collect();
    edges.push(window.end);
    let mut occ = vec![vec![0.0; keys]; b];
    let mut state = path.initial.clone();
    let mut counts = vec![0usize; path.opinions];
    for &s in &state {
        counts[s] += 1;
    }
    let mut add = |from: f64, to: f64, k: usize| {
        let mut s = from.max(window.start);
        let to = to.min(window.end);
        while s < to {
            // first batch whose right edge lies beyond s
            let idx = edges[1..b].partition_point(|&e| e <= s);
            let e = edges[idx + 1].min(to);
            occ[idx][k] += e - s;
            s = e;
        }
    };
    let mut t = 0.0;
    for ev in &path.events {
        if ev.time > window.end {
            break;
        }
        add(t, ev.time, key(&state, &counts));
        state[ev.agent as usize] = ev.to as usize;
        counts[ev.from as usize] -= 1;
        counts[ev.to as usize] += 1;
        t = ev.time;
    }
    add(t, window.end, key(&state, &counts));
    for row in &mut occ {
        let total: f64 = row.iter().sum();
        for x in row.iter_mut() {
            *x /= total;
        }
    }
    Ok(occ)
}

fn mean_and_error(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.len() as f64;
    let mut it = xs.clone();
    if let Some(first) = it.next() {
        if it.all(|x| x == first) {
            return (first, 0.0);
        }
    }
    let mean = xs.clone().sum::<f64>() / n;
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - 1.0)).sqrt();
    (mean, sd / n.sqrt())
}

fn moments_from_batches(batches: &[Vec<f64>], agents: usize) -> Moments {
    let x = |k: usize| k as f64 / agents as f64;
    let batch_means: Vec<f64> = batches
        .iter()
        .map(|row| row.iter().enumerate().map(|(k, &p)| p * x(k)).sum())
        .collect();
    let (mean, mean_se) = mean_and_error(batch_means.iter().copied());
    let batch_vars: Vec<f64> = batches
        .iter()
        .map(|row| row.iter().enumerate().map(|(k, &p)| p * (x(k) - mean).powi(2)).sum())
        .collect();
    let (var, var_se) = mean_and_error(batch_vars.iter().copied());
    Moments {
        mean: EstimateWithError {
            value: mean,
            std_error: mean_se,
            samples: batches.len(),
        },
        variance: EstimateWithError {
            value: var,
            std_error: var_se,
            samples: batches.len(),
        },
    }
}

fn count_batches(path: &SamplePath, opinion: usize, window: Window) -> Result<Vec<Vec<f64>>> {
    if opinion >= path.opinions {
        return Err(Error::IndexOutOfRange {
            index: opinion,
            size: path.opinions,
        });
    }
    batch_occupancy(path, window, path.agents() + 1, |_, c| c[opinion])
}

/// Time-average mean and variance of `n_j/N` over `[burn_in, t_end]` with 20
/// batch means.
pub fn time_average_moments(path: &SamplePath, opinion: usize, burn_in: f64, t_end: f64) -> Result<Moments> {
    time_average_moments_in(path, opinion, Window::new(burn_in, t_end))
}

pub fn time_average_moments_in(path: &SamplePath, opinion: usize, window: Window) -> Result<Moments> {
    Ok(moments_from_batches(&count_batches(path, opinion, window)?, path.agents()))
}

fn pooled_count_batches(ensemble: &Ensemble, opinion: usize, window: Window) -> Result<Vec<Vec<f64>>> {
    let per_path = ensemble
        .paths
        .par_iter()
        .map(|p| count_batches(p, opinion, window))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_path.into_iter().flatten().collect())
}

/// Moments pooled over every replication; batches from all paths are treated
/// as one sample.
pub fn ensemble_moments(ensemble: &Ensemble, opinion: usize, window: Window) -> Result<Moments> {
    let agents = agents_of(ensemble)?;
    Ok(moments_from_batches(&pooled_count_batches(ensemble, opinion, window)?, agents))
}

/// Time-weighted histogram of `n_j` over `{0..N}` pooled across replications.
pub fn empirical_count_distribution(ensemble: &Ensemble, opinion: usize, window: Window) -> Result<EmpiricalCounts> {
    agents_of(ensemble)?;
    let occ = occupancy_from_batches(pooled_count_batches(ensemble, opinion, window)?);
    Ok(EmpiricalCounts {
        distribution: CountDistribution::from_vec(occ.p)?,
        std_error: occ.std_error,
        samples: occ.samples,
    })
}

/// Time fraction spent in each joint configuration of a small network,
/// indexed as in `space`.
pub fn empirical_master_occupancy(path: &SamplePath, space: &MasterSpace, window: Window) -> Result<Occupancy> {
    if space.agents() != path.agents() || space.opinions() != path.opinions {
        return Err(Error::DimensionMismatch {
            expected: space.size(),
            got: path.agents(),
        });
    }
    let batches = batch_occupancy(path, window, space.size(), |s, _| space.encode(s))?;
    Ok(occupancy_from_batches(batches))
}

fn occupancy_from_batches(batches: Vec<Vec<f64>>) -> Occupancy {
    let keys = batches[0].len();
    let mut p = vec![0.0; keys];
    let mut se = vec![0.0; keys];
    for k in 0..keys {
        let (m, e) = mean_and_error(batches.iter().map(|row| row[k]));
        p[k] = m;
        se[k] = e;
    }
    Occupancy {
        p,
        std_error: se,
        samples: batches.len(),
    }
}

fn agents_of(ensemble: &Ensemble) -> Result<usize> {
    ensemble
        .paths
        .first()
        .map(|p| p.agents())
        .ok_or_else(|| Error::InvalidParams("empty ensemble".into()))
}
