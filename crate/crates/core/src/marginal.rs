//! Exact low-dimensional closures of the master model.
//!
//! Under identical agents and unbiased influence the per-agent marginals obey
//! the closed `N M`-dimensional linear system
//!
//! ```text
//! d/dt pi^r_j = sum_i q_ij pi^r_i + lambda (mean_{k in N(r)} pi^k_j - pi^r_j)
//! ```
//!
//! on any topology (the bracket is zero for isolated agents). On the complete
//! graph with two opinions, the joint law of any pair of agents is closed as
//! well, provided the initial law is exchangeable.

use crate::error::{Error, Result};
use crate::model::{InfluenceIntensities, NetworkModel, ProbabilityVector};
use crate::ode::{self, OdeOptions};
use crate::uniformization::check_grid;

/// Opinion distribution of every agent at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalField {
    pub time: f64,
    rows: Vec<Vec<f64>>,
}

impl MarginalField {
    pub fn new(rows: Vec<ProbabilityVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParams("marginal field has no agents".into()));
        }
        let m = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: r.len() });
        }
        Ok(Self {
            time: 0.0,
            rows: rows.into_iter().map(ProbabilityVector::into_vec).collect(),
        })
    }

    /// Every agent starts from the same distribution.
    pub fn uniform_rows(agents: usize, row: &ProbabilityVector) -> Self {
        Self {
            time: 0.0,
            rows: vec![row.as_slice().to_vec(); agents],
        }
    }

    pub fn agents(&self) -> usize {
        self.rows.len()
    }

    pub fn opinions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Solves the marginal closure on `grid`.
///
/// Refuses heterogeneous agents and biased intensities: the closure does not
/// hold outside those hypotheses. Only the intensities passed here are used;
/// the network schedule is ignored.
pub fn marginal_ode_solve(
    network: &NetworkModel,
    lambdas: &InfluenceIntensities,
    initial: &MarginalField,
    grid: &[f64],
    opts: OdeOptions,
) -> Result<Vec<MarginalField>> {
    if !network.has_identical_agents() {
        return Err(Error::HeterogeneousAgents);
    }
    if !lambdas.is_unbiased() {
        return Err(Error::BiasedIntensities(lambdas.as_slice().to_vec()));
    }
    let n = network.agent_count();
    let m = network.opinions();
    if lambdas.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: lambdas.len() });
    }
    if initial.agents() != n {
        return Err(Error::DimensionMismatch { expected: n, got: initial.agents() });
    }
    if initial.opinions() != m {
        return Err(Error::DimensionMismatch { expected: m, got: initial.opinions() });
    }
    let lambda = lambdas.get(0);
    let q = network.agent(0);
    let graph = network.graph();
    let rhs = |y: &[f64], dy: &mut [f64]| {
        for r in 0..n {
            let own = &y[r * m..(r + 1) * m];
            let nbrs = graph.neighbors(r);
            for j in 0..m {
                let mut v: f64 = (0..m).map(|i| q.rate(i, j) * own[i]).sum();
                if !nbrs.is_empty() && lambda != 0.0 {
                    let mean = nbrs.iter().map(|&k| y[k * m + j]).sum::<f64>() / nbrs.len() as f64;
                    v += lambda * (mean - own[j]);
                }
                dy[r * m + j] = v;
            }
        }
    };
    let y0: Vec<f64> = initial.rows.iter().flatten().copied().collect();
    let raw = ode::integrate(rhs, &y0, grid, opts)?;
    Ok(grid
        .iter()
        .zip(raw)
        .map(|(&t, y)| MarginalField {
            time: t,
            rows: y.chunks(m).map(<[f64]>::to_vec).collect(),
        })
        .collect())
}

/// Joint probabilities `(pi11, pi22)` of a pair of agents; the off-diagonal
/// entries are equal by exchangeability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairJointState {
    pub p11: f64,
    pub p22: f64,
}

impl PairJointState {
    pub fn new(p11: f64, p22: f64) -> Result<Self> {
        if !(p11 >= 0.0 && p22 >= 0.0 && p11 + p22 <= 1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "pair state ({p11}, {p22}) must be nonnegative with sum <= 1"
            )));
        }
        Ok(Self { p11, p22 })
    }

    /// Independent agents with common marginal `(p1, 1 - p1)`.
    pub fn independent(p1: f64) -> Result<Self> {
        Self::new(p1 * p1, (1.0 - p1) * (1.0 - p1))
    }

    /// `pi12 = pi21 = (1 - pi11 - pi22) / 2`.
    pub fn p12(&self) -> f64 {
        0.5 * (1.0 - self.p11 - self.p22)
    }
}

struct PairSystem {
    // y' = -a y + b
    a: [[f64; 2]; 2],
    b: [f64; 2],
}

impl PairSystem {
    fn new(n: usize, q12: f64, q21: f64, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("pair system needs N >= 2, got {n}")));
        }
        if !(q12 > 0.0 && q21 > 0.0) || !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParams(format!(
                "need q12, q21 > 0 and lambda >= 0, got {q12}, {q21}, {lambda}"
            )));
        }
        let share = lambda / (n as f64 - 1.0);
        let b = [q21 + share, q12 + share];
        let a = [[2.0 * q12 + b[0], b[0]], [b[1], 2.0 * q21 + b[1]]];
        Ok(Self { a, b })
    }

    fn equilibrium(&self) -> [f64; 2] {
        let [[a, b], [c, d]] = self.a;
        let det = a * d - b * c;
        [
            (d * self.b[0] - b * self.b[1]) / det,
            (a * self.b[1] - c * self.b[0]) / det,
        ]
    }
}

/// `exp(m)` for a real 2x2 matrix, via `(m - sI)^2 = delta I` with
/// `s = tr(m)/2`.
fn expm2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let s = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let delta = half * half + m[0][1] * m[1][0];
    // exp(m) = c I + k (m - sI)
    let (c, k) = if delta.abs() < 1e-12 {
        let e = s.exp();
        (e * (1.0 + delta / 2.0), e * (1.0 + delta / 6.0))
    } else if delta > 0.0 {
        let r = delta.sqrt();
        let (ep, em) = ((s + r).exp(), (s - r).exp());
        (0.5 * (ep + em), 0.5 * (ep - em) / r)
    } else {
        let w = (-delta).sqrt();
        let e = s.exp();
        (e * w.cos(), e * w.sin() / w)
    };
    [
        [c + k * (m[0][0] - s), k * m[0][1]],
        [k * m[1][0], c + k * (m[1][1] - s)],
    ]
}

/// Solves the pair-joint system of the unbiased Peer Assembly on `grid`
/// exactly, as `y(t) = y* + exp(-A t) (y0 - y*)`.
pub fn pair_joint_ode_solve(
    n: usize,
    q12: f64,
    q21: f64,
    lambda: f64,
    initial: PairJointState,
    grid: &[f64],
) -> Result<Vec<PairJointState>> {
    check_grid(grid)?;
    let sys = PairSystem::new(n, q12, q21, lambda)?;
    let eq = sys.equilibrium();
    let d0 = [initial.p11 - eq[0], initial.p22 - eq[1]];
    Ok(grid
        .iter()
        .map(|&t| {
            let e = expm2([
                [-sys.a[0][0] * t, -sys.a[0][1] * t],
                [-sys.a[1][0] * t, -sys.a[1][1] * t],
            ]);
            PairJointState {
                p11: eq[0] + e[0][0] * d0[0] + e[0][1] * d0[1],
                p22: eq[1] + e[1][0] * d0[0] + e[1][1] * d0[1],
            }
        })
        .collect())
}

/// Equilibrium of the pair system solved numerically; used to check the
/// closed form below.
pub fn pair_joint_equilibrium(n: usize, q12: f64, q21: f64, lambda: f64) -> Result<PairJointState> {
    let eq = PairSystem::new(n, q12, q21, lambda)?.equilibrium();
    Ok(PairJointState { p11: eq[0], p22: eq[1] })
}

/// Stationary `pi11 = q21 (lambda + q21 (N-1)) / ((q12+q21)(lambda + (q12+q21)(N-1)))`.
pub fn pair_joint_stationary(n: usize, q12: f64, q21: f64, lambda: f64) -> Result<f64> {
    PairSystem::new(n, q12, q21, lambda)?;
    let peers = n as f64 - 1.0;
    let q = q12 + q21;
    Ok(q21 * (lambda + q21 * peers) / (q * (lambda + q * peers)))
}

/// `Var[n1/N]` from the pair probability, through
/// `Var[n1] = N pi1 + N(N-1) pi11 - N^2 pi1^2`.
pub fn variance_from_pair(n: usize, q12: f64, q21: f64, pi11: f64) -> f64 {
    let nf = n as f64;
    let pi1 = q21 / (q12 + q21);
    (nf * pi1 + nf * (nf - 1.0) * pi11 - nf * nf * pi1 * pi1) / (nf * nf)
}
