//! Undirected interaction graphs and their edge-list text format.
//!
//! The text format is one header line holding the node count followed by one
//! `u v` line per edge, nodes numbered from 1:
//!
//! ```text
//! 3
//! 1 2
//! 1 3
//! 2 3
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Simple undirected graph over nodes `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Neighbour lists are
/// sorted as well, so iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            neighbors: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from 0-based edge pairs, rejecting self-loops,
    /// duplicates (in either orientation) and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut norm = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange {
                    index: u.max(v),
                    size: n,
                });
            }
            if u == v {
                return Err(Error::InvalidParams(format!("self-loop at node {}", u + 1)));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams(format!(
                "duplicate edge ({}, {})",
                w[0].0 + 1,
                w[0].1 + 1
            )));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &norm {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges: norm,
            neighbors,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, r: usize) -> &[usize] {
        &self.neighbors[r]
    }

    pub fn degree(&self, r: usize) -> usize {
        self.neighbors[r].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Whether every pair of nodes is joined by a path. The empty graph on
    /// zero or one node counts as connected.
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Serializes to the 1-based edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        out
    }

    /// Parses the 1-based edge-list text format. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidParams("edge list is empty".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad node count line: {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<usize> {
                let s = s.ok_or_else(|| Error::InvalidParams(format!("bad edge line: {line:?}")))?;
                let x: usize = s
                    .parse()
                    .map_err(|_| Error::InvalidParams(format!("bad edge line: {line:?}")))?;
                if x == 0 || x > n {
                    return Err(Error::IndexOutOfRange { index: x, size: n });
                }
                Ok(x - 1)
            };
            let u = parse(parts.next())?;
            let v = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::InvalidParams(format!("bad edge line: {line:?}")));
            }
            edges.push((u, v));
        }
        Self::from_edges(n, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_lists_match_edges() {
        let g = Graph::from_edges(4, [(2, 0), (1, 3), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3)]);
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.neighbors(3), &[1]);
        assert!(g.has_edge(3, 1));
        assert!(!g.has_edge(2, 3));
        assert!(g.is_connected());
    }

    #[test]
    fn rejects_self_loop_and_duplicate() {
        assert!(matches!(
            Graph::from_edges(3, [(1, 1)]),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 3)]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(5, [(0, 4), (1, 2), (2, 3)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "5\n1 5\n2 3\n3 4\n");
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
        assert!(!g.is_connected());
    }

    #[test]
    fn edge_list_rejects_zero_index() {
        assert!(Graph::parse_edge_list("3\n0 1\n").is_err());
        assert!(Graph::parse_edge_list("3\n1 2 3\n").is_err());
        assert!(Graph::parse_edge_list("").is_err());
    }
}
