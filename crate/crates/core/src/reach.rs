//! Strong connectivity of directed supports.

/// Returns the nodes that are not both reachable from node 0 and able to
/// reach node 0. An empty result means the directed graph given by
/// `succ`/`pred` adjacency lists is strongly connected.
pub(crate) fn not_strongly_connected_with_first(succ: &[Vec<usize>], pred: &[Vec<usize>]) -> Vec<usize> {
    let n = succ.len();
    if n == 0 {
        return Vec::new();
    }
    let fwd = reachable(succ);
    let bwd = reachable(pred);
    (0..n).filter(|&i| !(fwd[i] && bwd[i])).collect()
}

fn reachable(adj: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}
