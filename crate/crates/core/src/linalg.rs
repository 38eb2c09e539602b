//! Small dense helpers shared by the stand-alone and master solvers.

use nalgebra::{DMatrix, DVector};

/// Unit-sum left null vector of a dense generator `g` (row-major, `n x n`).
///
/// Solves `x' G = 0, 1'x = 1` by transposing and overwriting the last
/// equation with the normalization row. Returns `None` when the system is
/// singular, i.e. the null space is not one-dimensional.
pub(crate) fn left_null_vector(g: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(g.len(), n * n);
    let mut a = DMatrix::<f64>::from_fn(n, n, |i, j| g[j * n + i]);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(x.iter().copied().collect())
}
