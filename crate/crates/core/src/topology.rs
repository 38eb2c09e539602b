//! Generators for the interaction graphs of the topology study: no edges,
//! complete graph, star and Watts-Strogatz small world.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{rng_for, STREAM_TOPOLOGY};

#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    /// Non-interacting agents.
    Empty { n: usize },
    Complete { n: usize },
    /// Node 0 joined to every other node; leaves are not connected.
    Star { n: usize },
    /// Ring lattice with `k` neighbours on each side, each edge rewired with
    /// probability `p`.
    SmallWorld { n: usize, k: usize, p: f64, seed: u64 },
}

impl TopologySpec {
    pub fn node_count(&self) -> usize {
        match *self {
            Self::Empty { n } | Self::Complete { n } | Self::Star { n } => n,
            Self::SmallWorld { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if n == 0 {
            return Err(Error::InvalidParams("topology needs at least one node".into()));
        }
        if let Self::SmallWorld { n, k, p, .. } = *self {
            if k == 0 || 2 * k >= n {
                return Err(Error::InvalidParams(format!(
                    "small world half-degree k={k} must satisfy 1 <= k < n/2 (n={n})"
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!(
                    "rewiring probability p={p} must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Builds the graph. Deterministic for a given spec, seed included.
    pub fn generate(&self) -> Result<Graph> {
        self.validate()?;
        match *self {
            Self::Empty { n } => Ok(Graph::empty(n)),
            Self::Complete { n } => {
                Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
            }
            Self::Star { n } => Graph::from_edges(n, (1..n).map(|v| (0, v))),
            Self::SmallWorld { n, k, p, seed } => Ok(watts_strogatz(n, k, p, seed)),
        }
    }
}

fn watts_strogatz(n: usize, k: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng_for(seed, STREAM_TOPOLOGY);
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for d in 1..=k {
            let v = (u + d) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    // Lap d visits the edges (u, u+d); each is rewired at its u end.
    for d in 1..=k {
        for u in 0..n {
            let v = (u + d) % n;
            if !adj[u].contains(&v) || !rng.random_bool(p) {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, set)| set.iter().filter(move |&&v| v > u).map(move |&v| (u, v)));
    Graph::from_edges(n, edges).expect("rewiring keeps the graph simple")
}

/// Parses `kind:N[,k=K][,p=P][,seed=S]`, e.g. `smallworld:100,k=1,p=0.2,seed=7`.
pub fn parse_topology_spec(s: &str) -> Result<TopologySpec> {
    let bad = || Error::InvalidParams(format!("cannot parse topology spec {s:?}"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    let mut parts = rest.split(',');
    let n: usize = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let (mut k, mut p, mut seed) = (1usize, 0.2f64, 0u64);
    for part in parts {
        let (key, val) = part.split_once('=').ok_or_else(bad)?;
        match key.trim() {
            "k" => k = val.trim().parse().map_err(|_| bad())?,
            "p" => p = val.trim().parse().map_err(|_| bad())?,
            "seed" => seed = val.trim().parse().map_err(|_| bad())?,
            _ => return Err(bad()),
        }
    }
    let spec = match kind.trim() {
        "empty" | "noninteracting" => TopologySpec::Empty { n },
        "complete" => TopologySpec::Complete { n },
        "star" => TopologySpec::Star { n },
        "smallworld" => TopologySpec::SmallWorld { n, k, p, seed },
        _ => return Err(bad()),
    };
    spec.validate()?;
    Ok(spec)
}
