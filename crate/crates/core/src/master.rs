//! Exact master model over the joint opinion tuple of all agents.
//!
//! A joint state `(s_1, ..., s_N)` with 0-based opinions is stored at the
//! mixed-radix index `sum_r s_r M^(N-1-r)`, agent 0 most significant. Rows of
//! the generator are therefore ordered lexicographically by opinion tuple.
//!
//! Only single-agent changes carry rate. For agent `r` in opinion `i` moving
//! to `j != i` the rate is `q_ij^[r] + lambda_j c_j / deg(r)`, where `c_j`
//! counts neighbours of `r` holding `j`; isolated agents feel no influence.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{InfluenceIntensities, NetworkModel, ProbabilityVector};
use crate::reach;
use crate::uniformization::{self, Generator};

/// Default cap on the number of joint states.
pub const DEFAULT_MAX_STATES: usize = 1 << 24;

const DENSE_SOLVE_LIMIT: usize = 2048;

/// Mixed-radix indexing of joint opinion tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MasterSpace {
    agents: usize,
    opinions: usize,
    size: usize,
}

impl MasterSpace {
    pub fn new(agents: usize, opinions: usize) -> Result<Self> {
        Self::with_limit(agents, opinions, DEFAULT_MAX_STATES)
    }

    pub fn with_limit(agents: usize, opinions: usize, max_states: usize) -> Result<Self> {
        let too_large = Error::StateSpaceTooLarge {
            agents,
            opinions,
            limit: max_states,
        };
        let mut size = 1usize;
        for _ in 0..agents {
            size = size.checked_mul(opinions).ok_or_else(|| too_large.clone())?;
            if size > max_states {
                return Err(too_large);
            }
        }
        Ok(Self {
            agents,
            opinions,
            size,
        })
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn opinions(&self) -> usize {
        self.opinions
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Place value of agent `r`.
    #[inline]
    pub fn stride(&self, r: usize) -> usize {
        self.opinions.pow((self.agents - 1 - r) as u32)
    }

    pub fn encode(&self, opinions: &[usize]) -> usize {
        debug_assert_eq!(opinions.len(), self.agents);
        opinions.iter().fold(0, |acc, &s| acc * self.opinions + s)
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.agents];
        self.decode_into(index, &mut out);
        out
    }

    pub fn decode_into(&self, mut index: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = index % self.opinions;
            index /= self.opinions;
        }
    }

    fn check(&self, pi: &[f64]) -> Result<()> {
        if pi.len() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                got: pi.len(),
            });
        }
        Ok(())
    }

    fn check_agent(&self, r: usize) -> Result<()> {
        if r >= self.agents {
            return Err(Error::IndexOutOfRange {
                index: r,
                size: self.agents,
            });
        }
        Ok(())
    }

    /// Opinion distribution of agent `r`.
    pub fn marginal(&self, pi: &[f64], r: usize) -> Result<ProbabilityVector> {
        self.check(pi)?;
        self.check_agent(r)?;
        let stride = self.stride(r);
        let mut out = vec![0.0; self.opinions];
        for (idx, &p) in pi.iter().enumerate() {
            out[(idx / stride) % self.opinions] += p;
        }
        Ok(ProbabilityVector::from_solver(out))
    }

    /// Joint distribution of agents `r` and `s` as a row-major `M x M` array;
    /// entry `(i, j)` is the probability that `r` holds `i` and `s` holds `j`.
    pub fn pair_joint(&self, pi: &[f64], r: usize, s: usize) -> Result<Vec<Vec<f64>>> {
        self.check(pi)?;
        self.check_agent(r)?;
        self.check_agent(s)?;
        if r == s {
            return Err(Error::SameAgent(r + 1));
        }
        let (sr, ss) = (self.stride(r), self.stride(s));
        let m = self.opinions;
        let mut out = vec![vec![0.0; m]; m];
        for (idx, &p) in pi.iter().enumerate() {
            out[(idx / sr) % m][(idx / ss) % m] += p;
        }
        Ok(out)
    }

    /// Distribution of the number of agents holding `opinion`, over `0..=N`.
    pub fn count_distribution(&self, pi: &[f64], opinion: usize) -> Result<ProbabilityVector> {
        self.check(pi)?;
        if opinion >= self.opinions {
            return Err(Error::IndexOutOfRange {
                index: opinion,
                size: self.opinions,
            });
        }
        let mut out = vec![0.0; self.agents + 1];
        let mut state = vec![0; self.agents];
        for (idx, &p) in pi.iter().enumerate() {
            self.decode_into(idx, &mut state);
            out[state.iter().filter(|&&x| x == opinion).count()] += p;
        }
        Ok(ProbabilityVector::from_solver(out))
    }

    /// Product distribution `pi^[1] x ... x pi^[N]` of independent agents.
    pub fn product(&self, marginals: &[ProbabilityVector]) -> Result<ProbabilityVector> {
        if marginals.len() != self.agents {
            return Err(Error::DimensionMismatch {
                expected: self.agents,
                got: marginals.len(),
            });
        }
        if let Some(m) = marginals.iter().find(|m| m.len() != self.opinions) {
            return Err(Error::DimensionMismatch {
                expected: self.opinions,
                got: m.len(),
            });
        }
        let mut state = vec![0; self.agents];
        let p = (0..self.size)
            .map(|idx| {
                self.decode_into(idx, &mut state);
                state.iter().zip(marginals).map(|(&s, m)| m[s]).product()
            })
            .collect();
        Ok(ProbabilityVector::from_solver(p))
    }
}

/// Sparse generator of the master model. Off-diagonal entries live in
/// compressed rows sorted by column; diagonals are kept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterGenerator {
    space: MasterSpace,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Parts<'a> {
    Isolated,
    Interaction(&'a InfluenceIntensities),
    Full(&'a InfluenceIntensities),
}

/// Kronecker-sum generator `Q0` of the non-interacting agents.
pub fn build_noninteracting_generator(network: &NetworkModel, max_states: usize) -> Result<MasterGenerator> {
    assemble(network, Parts::Isolated, max_states)
}

/// Interaction part `A0` alone.
pub fn build_interaction_generator(
    network: &NetworkModel,
    lambdas: &InfluenceIntensities,
    max_states: usize,
) -> Result<MasterGenerator> {
    assemble(network, Parts::Interaction(lambdas), max_states)
}

/// Full generator `Q0 + A0`.
pub fn build_master_generator(
    network: &NetworkModel,
    lambdas: &InfluenceIntensities,
    max_states: usize,
) -> Result<MasterGenerator> {
    assemble(network, Parts::Full(lambdas), max_states)
}

fn assemble(network: &NetworkModel, parts: Parts<'_>, max_states: usize) -> Result<MasterGenerator> {
    let n = network.agent_count();
    let m = network.opinions();
    let space = MasterSpace::with_limit(n, m, max_states)?;
    let lambdas = match parts {
        Parts::Isolated => None,
        Parts::Interaction(l) | Parts::Full(l) => Some(l),
    };
    if let Some(l) = lambdas {
        if l.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: l.len(),
            });
        }
    }
    let with_q = !matches!(parts, Parts::Interaction(_));
    let graph = network.graph();
    let strides: Vec<usize> = (0..n).map(|r| space.stride(r)).collect();

    let rows: Vec<Vec<(usize, f64)>> = (0..space.size())
        .into_par_iter()
        .map_init(
            || (vec![0usize; n], vec![0usize; m]),
            |(state, counts), idx| {
                space.decode_into(idx, state);
                let mut row = Vec::with_capacity(n * (m - 1));
                for r in 0..n {
                    let own = state[r];
                    let deg = graph.degree(r);
                    counts.fill(0);
                    for &k in graph.neighbors(r) {
                        counts[state[k]] += 1;
                    }
                    let q = network.agent(r);
                    for j in (0..m).filter(|&j| j != own) {
                        let mut rate = if with_q { q.rate(own, j) } else { 0.0 };
                        if let Some(l) = lambdas {
                            if deg > 0 && counts[j] > 0 {
                                rate += l.get(j) * counts[j] as f64 / deg as f64;
                            }
                        }
                        if rate != 0.0 {
                            row.push((idx - own * strides[r] + j * strides[r], rate));
                        }
                    }
                }
                row.sort_unstable_by_key(|e| e.0);
                row
            },
        )
        .collect();

    let nnz = rows.iter().map(Vec::len).sum();
    let mut row_ptr = Vec::with_capacity(space.size() + 1);
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    let mut diag = Vec::with_capacity(space.size());
    row_ptr.push(0);
    for row in rows {
        if let Some((_, v)) = row.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonfiniteRate(format!("{v}")));
        }
        diag.push(-row.iter().map(|e| e.1).sum::<f64>());
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(MasterGenerator {
        space,
        row_ptr,
        cols,
        vals,
        diag,
    })
}

impl MasterGenerator {
    pub fn space(&self) -> &MasterSpace {
        &self.space
    }

    /// Number of stored nonzeros, off-diagonal plus nonzero diagonal.
    pub fn nnz(&self) -> usize {
        self.vals.len() + self.diag.iter().filter(|&&d| d != 0.0).count()
    }

    pub fn off_diagonal_nnz(&self) -> usize {
        self.vals.len()
    }

    /// Off-diagonal entries of row `i` as `(column, rate)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Dense row-major copy. Intended for small models and tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.space.size();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            g[i * n + i] = self.diag[i];
            for (j, v) in self.row(i) {
                g[i * n + j] = v;
            }
        }
        g
    }

    /// Coordinate text export: header `size nnz`, then `row col value`
    /// lines (0-based) in row-major order.
    pub fn to_coordinate_text(&self) -> String {
        let n = self.space.size();
        let mut out = format!("{} {}\n", n, self.nnz());
        for i in 0..n {
            let mut wrote_diag = self.diag[i] == 0.0;
            for (j, v) in self.row(i) {
                if !wrote_diag && j > i {
                    let _ = writeln!(out, "{} {} {}", i, i, self.diag[i]);
                    wrote_diag = true;
                }
                let _ = writeln!(out, "{i} {j} {v}");
            }
            if !wrote_diag {
                let _ = writeln!(out, "{} {} {}", i, i, self.diag[i]);
            }
        }
        out
    }

    fn support(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let n = self.space.size();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for i in 0..n {
            for (j, _) in self.row(i) {
                succ[i].push(j);
                pred[j].push(i);
            }
        }
        (succ, pred)
    }

    pub fn is_irreducible(&self) -> bool {
        let (succ, pred) = self.support();
        reach::not_strongly_connected_with_first(&succ, &pred).is_empty()
    }
}

impl Generator for MasterGenerator {
    fn dim(&self) -> usize {
        self.space.size()
    }

    fn max_exit_rate(&self) -> f64 {
        self.diag.iter().map(|d| -d).fold(0.0, f64::max)
    }

    fn left_mul(&self, x: &[f64], out: &mut [f64]) {
        for ((o, &xi), &d) in out.iter_mut().zip(x).zip(&self.diag) {
            *o = xi * d;
        }
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k]] += xi * self.vals[k];
            }
        }
    }
}

/// Time-indexed probability vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ProbabilityVector>,
}

/// Transient distribution of the master model on `grid`.
pub fn master_transient(
    gen: &MasterGenerator,
    pi0: &ProbabilityVector,
    grid: &[f64],
) -> Result<ProbabilityTrajectory> {
    let raw = uniformization::transient(gen, pi0.as_slice(), grid)?;
    Ok(ProbabilityTrajectory {
        times: grid.to_vec(),
        states: raw.into_iter().map(ProbabilityVector::from_solver).collect(),
    })
}

/// Unique stationary distribution of an irreducible master generator.
///
/// Small models use a dense LU solve with one equation replaced by the
/// normalization; larger ones use Gauss-Seidel sweeps. In both cases the
/// result is polished by power iteration on the uniformized kernel when the
/// residual `|pi' G|` is not small relative to the largest exit rate.
pub fn master_steady_state(gen: &MasterGenerator) -> Result<ProbabilityVector> {
    let n = gen.dim();
    let (succ, pred) = gen.support();
    let bad = reach::not_strongly_connected_with_first(&succ, &pred);
    if !bad.is_empty() {
        return Err(Error::ReducibleGenerator { unreachable: bad.len() });
    }
    let scale = gen.max_exit_rate().max(f64::MIN_POSITIVE);
    if n == 1 {
        return Ok(ProbabilityVector::point_mass(1, 0).expect("single state"));
    }
    let tol = 1e-13 * scale;

    let mut x = if n <= DENSE_SOLVE_LIMIT {
        let dense = gen.to_dense();
        linalg::left_null_vector(&dense, n).unwrap_or_else(|| vec![1.0 / n as f64; n])
    } else {
        gauss_seidel(gen, &pred, tol)
    };
    normalize(&mut x);
    if residual(gen, &x) > tol || x.iter().any(|&v| v < -1e-14) {
        power_polish(gen, &mut x, tol);
    }
    Ok(ProbabilityVector::from_solver(x))
}

fn normalize(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let s: f64 = x.iter().sum();
    for v in x.iter_mut() {
        *v /= s;
    }
}

fn residual(gen: &MasterGenerator, x: &[f64]) -> f64 {
    let mut out = vec![0.0; x.len()];
    gen.left_mul(x, &mut out);
    out.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn gauss_seidel(gen: &MasterGenerator, pred: &[Vec<usize>], tol: f64) -> Vec<f64> {
    let n = gen.dim();
    // Incoming rates per column, aligned with `pred`.
    let incoming: Vec<Vec<f64>> = pred
        .iter()
        .enumerate()
        .map(|(j, from)| from.iter().map(|&i| gen.entry(i, j)).collect())
        .collect();
    let mut x = vec![1.0 / n as f64; n];
    for sweep in 0..20_000 {
        for j in 0..n {
            let inflow: f64 = pred[j].iter().zip(&incoming[j]).map(|(&i, &g)| x[i] * g).sum();
            x[j] = inflow / -gen.diagonal(j);
        }
        normalize(&mut x);
        if sweep % 10 == 9 && residual(gen, &x) <= tol {
            break;
        }
    }
    x
}

fn power_polish(gen: &MasterGenerator, x: &mut [f64], tol: f64) {
    let lambda = gen.max_exit_rate() * 1.0001;
    let mut g = vec![0.0; x.len()];
    for it in 0..1_000_000 {
        gen.left_mul(x, &mut g);
        if it % 64 == 0 && g.iter().fold(0.0_f64, |a, v| a.max(v.abs())) <= tol {
            break;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += gi / lambda;
        }
    }
    normalize(x);
}
