//! Domain types for agents, opinions and influence, plus stand-alone agent
//! analytics.
//!
//! Opinions are indexed from 0 in the Rust API (`0` is "opinion 1"). Agents
//! are indexed from 0 as well. File formats and error messages use 1-based
//! labels.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::reach;

/// Relative tolerance on rate-matrix row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Checks that a square matrix is a valid irreducible CTMC generator.
///
/// The checks run in order: shape and finiteness, Metzler property, zero row
/// sums (relative to the largest magnitude entry), then irreducibility of the
/// directed graph of strictly positive off-diagonal rates.
pub fn validate_rate_matrix(rows: &[Vec<f64>]) -> Result<()> {
    let m = rows.len();
    if m < 2 {
        return Err(Error::InvalidParams(format!(
            "a rate matrix needs at least 2 opinions, got {m}"
        )));
    }
    for row in rows {
        if row.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: row.len(),
            });
        }
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonfiniteRate(format!("{x}")));
        }
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &q) in row.iter().enumerate() {
            if i != j && q < 0.0 {
                return Err(Error::NegativeOffDiagonal { row: i + 1, col: j + 1 });
            }
        }
    }
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |a, &x| a.max(x.abs()));
    for (i, row) in rows.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if sum.abs() > ROW_SUM_TOL * scale {
            return Err(Error::RowSumNonzero { row: i + 1, sum });
        }
    }
    let mut succ = vec![Vec::new(); m];
    let mut pred = vec![Vec::new(); m];
    for (i, row) in rows.iter().enumerate() {
        for (j, &q) in row.iter().enumerate() {
            if i != j && q != 0.0 {
                succ[i].push(j);
                pred[j].push(i);
            }
        }
    }
    let bad = reach::not_strongly_connected_with_first(&succ, &pred);
    if !bad.is_empty() {
        return Err(Error::Reducible {
            unreachable: bad.into_iter().map(|i| i + 1).collect(),
        });
    }
    Ok(())
}

/// Validated, irreducible transition rate matrix of a stand-alone agent.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    m: usize,
    q: Vec<f64>,
}

impl RateMatrix {
    /// Builds from full rows (diagonal included) after validation.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        validate_rate_matrix(&rows)?;
        let m = rows.len();
        Ok(Self {
            m,
            q: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds from off-diagonal rates; diagonal entries are ignored and
    /// replaced by the negative off-diagonal row sums.
    pub fn from_off_diagonal(rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut rows = rows;
        for i in 0..rows.len() {
            if i < rows[i].len() {
                rows[i][i] = 0.0;
                let s: f64 = rows[i].iter().sum();
                rows[i][i] = -s;
            }
        }
        Self::from_rows(rows)
    }

    /// Two-opinion matrix `[[-q12, q12], [q21, -q21]]`.
    pub fn two_state(q12: f64, q21: f64) -> Result<Self> {
        Self::from_rows(vec![vec![-q12, q12], vec![q21, -q21]])
    }

    pub fn opinions(&self) -> usize {
        self.m
    }

    /// Rate from opinion `i` to opinion `j` (0-based).
    #[inline]
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.m + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.q.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// Largest total exit rate `max_i |q_ii|`.
    pub fn max_exit_rate(&self) -> f64 {
        (0..self.m).map(|i| -self.rate(i, i)).fold(0.0, f64::max)
    }

    /// Smallest strictly positive off-diagonal rate.
    pub fn min_positive_rate(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.m {
            for j in 0..self.m {
                let q = self.rate(i, j);
                if i != j && q > 0.0 {
                    best = best.min(q);
                }
            }
        }
        best
    }

    /// Unique stationary distribution `pi' Q = 0` of the stand-alone agent.
    pub fn stationary(&self) -> ProbabilityVector {
        stand_alone_stationary(self)
    }
}

/// Stationary distribution of a stand-alone agent.
///
/// A validated matrix is irreducible, so the normalized linear system is
/// non-singular and the solution is strictly positive.
pub fn stand_alone_stationary(q: &RateMatrix) -> ProbabilityVector {
    let m = q.opinions();
    let x = linalg::left_null_vector(q.as_slice(), m)
        .expect("irreducible generator has a one-dimensional null space");
    ProbabilityVector::from_solver(x)
}

/// Bernoulli variance `q12 q21 / (q12 + q21)^2` of a two-opinion agent at
/// stationarity.
pub fn stand_alone_variance(q: &RateMatrix) -> Result<f64> {
    if q.opinions() != 2 {
        return Err(Error::WrongOpinionCount {
            expected: 2,
            got: q.opinions(),
        });
    }
    let q12 = q.rate(0, 1);
    let q21 = q.rate(1, 0);
    let s = q12 + q21;
    Ok(q12 * q21 / (s * s))
}

/// Per-opinion influence intensities `lambda_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceIntensities(Vec<f64>);

impl InfluenceIntensities {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidParams("influence vector is empty".into()));
        }
        if let Some((j, &x)) = lambda
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x < 0.0)
        {
            return Err(Error::InvalidParams(format!(
                "lambda[{}] = {x} must be finite and nonnegative",
                j + 1
            )));
        }
        Ok(Self(lambda))
    }

    /// The same intensity `lambda` for each of `m` opinions.
    pub fn unbiased(m: usize, lambda: f64) -> Result<Self> {
        Self::new(vec![lambda; m])
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_unbiased(&self) -> bool {
        self.0.iter().all(|&x| x == self.0[0])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

/// Piecewise-constant, right-continuous influence schedule.
///
/// Segment `k` is active on `[starts[k], starts[k + 1])`; the last segment
/// extends to infinity. The first segment starts at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySchedule {
    starts: Vec<f64>,
    segments: Vec<InfluenceIntensities>,
}

impl IntensitySchedule {
    pub fn constant(lambda: InfluenceIntensities) -> Self {
        Self {
            starts: vec![0.0],
            segments: vec![lambda],
        }
    }

    /// Builds a schedule from `(start time, intensities)` pairs. Start times
    /// must begin at 0 and increase strictly; all segments must have the same
    /// number of opinions.
    pub fn new(segments: Vec<(f64, InfluenceIntensities)>) -> Result<Self> {
        let Some(first) = segments.first() else {
            return Err(Error::InvalidParams("schedule has no segments".into()));
        };
        if first.0 != 0.0 {
            return Err(Error::InvalidParams(format!(
                "schedule must start at t=0, got {}",
                first.0
            )));
        }
        let m = first.1.len();
        for w in segments.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "schedule breakpoints must increase strictly: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(s) = segments.iter().find(|s| s.1.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: s.1.len(),
            });
        }
        let (starts, segments) = segments.into_iter().unzip();
        Ok(Self { starts, segments })
    }

    pub fn opinions(&self) -> usize {
        self.segments[0].len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, &InfluenceIntensities)> {
        self.starts.iter().copied().zip(self.segments.iter())
    }

    /// Start of segment `k`.
    pub fn start(&self, k: usize) -> f64 {
        self.starts[k]
    }

    /// End of segment `k` (`+inf` for the last).
    pub fn end(&self, k: usize) -> f64 {
        self.starts.get(k + 1).copied().unwrap_or(f64::INFINITY)
    }

    /// Index of the segment active at time `t`; at a breakpoint the new
    /// segment is returned.
    pub fn segment_index(&self, t: f64) -> usize {
        self.starts.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn at(&self, t: f64) -> &InfluenceIntensities {
        &self.segments[self.segment_index(t)]
    }

    pub fn is_constant(&self) -> bool {
        self.segments.len() == 1
    }
}

/// The full problem instance: interaction graph, per-agent rate matrices and
/// the influence schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    graph: Graph,
    agents: Vec<RateMatrix>,
    schedule: IntensitySchedule,
}

impl NetworkModel {
    pub fn new(graph: Graph, agents: Vec<RateMatrix>, schedule: IntensitySchedule) -> Result<Self> {
        if agents.len() != graph.node_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.node_count(),
                got: agents.len(),
            });
        }
        if agents.is_empty() {
            return Err(Error::InvalidParams("network has no agents".into()));
        }
        let m = agents[0].opinions();
        if let Some(a) = agents.iter().find(|a| a.opinions() != m) {
            return Err(Error::WrongOpinionCount {
                expected: m,
                got: a.opinions(),
            });
        }
        if schedule.opinions() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: schedule.opinions(),
            });
        }
        Ok(Self {
            graph,
            agents,
            schedule,
        })
    }

    /// Every agent shares the rate matrix `q`.
    pub fn identical(graph: Graph, q: RateMatrix, schedule: IntensitySchedule) -> Result<Self> {
        let agents = vec![q; graph.node_count()];
        Self::new(graph, agents, schedule)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn agents(&self) -> &[RateMatrix] {
        &self.agents
    }

    pub fn agent(&self, r: usize) -> &RateMatrix {
        &self.agents[r]
    }

    pub fn schedule(&self) -> &IntensitySchedule {
        &self.schedule
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn opinions(&self) -> usize {
        self.agents[0].opinions()
    }

    pub fn has_identical_agents(&self) -> bool {
        self.agents.iter().all(|a| a == &self.agents[0])
    }

    /// Copy of the model with a different schedule.
    pub fn with_schedule(&self, schedule: IntensitySchedule) -> Result<Self> {
        Self::new(self.graph.clone(), self.agents.clone(), schedule)
    }
}

/// Nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Accepts entries that are nonnegative and sum to one within `1e-9`,
    /// then renormalizes exactly.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {x} is negative or not finite")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
        }
        Ok(Self(p.into_iter().map(|x| x / s).collect()))
    }

    /// Normalizes arbitrary nonnegative weights with a positive sum.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidDistribution("weights must be finite and nonnegative".into()));
        }
        let s: f64 = w.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self(w.into_iter().map(|x| x / s).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, size: n });
        }
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        Ok(Self(p))
    }

    /// Clamps round-off negatives produced by a solver and renormalizes.
    pub(crate) fn from_solver(mut p: Vec<f64>) -> Self {
        for x in &mut p {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let s: f64 = p.iter().sum();
        Self(p.into_iter().map(|x| x / s).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
