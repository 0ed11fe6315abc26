//! Block saddle-point systems `[[A, -B^T], [-B, 0]]` on `[u; p]`.

use super::dirichlet::Reduction;
use crate::linalg::{lu_factor_grouped, LinalgError, LuFactorization, LuOptions, SparseMatrix, Triplets};

/// Saddle matrix, optionally bordered by a pressure-mean multiplier row
/// and column `m`.
pub fn saddle_matrix(a: &SparseMatrix, b: &SparseMatrix, mean: Option<&[f64]>) -> SparseMatrix {
    let (nu, np) = (a.nrows, b.nrows);
    let n = nu + np + usize::from(mean.is_some());
    let mut t = Triplets::with_capacity(n, n, a.nnz() + 2 * b.nnz() + 2 * np);
    t.add_block(0, 0, a, 1.0);
    t.add_block_transposed(0, nu, b, -1.0);
    t.add_block(nu, 0, b, -1.0);
    if let Some(m) = mean {
        for (q, &v) in m.iter().enumerate() {
            t.push(nu + q, nu + np, v);
            t.push(nu + np, nu + q, v);
        }
    }
    t.build().expect("block shapes agree")
}

/// Factored saddle system with velocity constraints eliminated.
pub struct SaddleSolver {
    full: SparseMatrix,
    reduced: SparseMatrix,
    reduction: Reduction,
    lu: LuFactorization,
    nu: usize,
    np: usize,
}

impl SaddleSolver {
    /// `fixed` holds `(velocity dof, value)` pairs.
    pub fn new(
        a: &SparseMatrix,
        b: &SparseMatrix,
        mean: Option<&[f64]>,
        fixed: &[(usize, f64)],
    ) -> Result<Self, LinalgError> {
        let full = saddle_matrix(a, b, mean);
        let reduction = Reduction::new(full.nrows, fixed.iter().copied());
        let reduced = reduction.matrix(&full);
        // Velocity dof `c * n + node`; pressure `q` sits on vertex node `q`.
        let (nu, np) = (a.nrows, b.nrows);
        let nodes = nu / 2;
        let group = |i: usize| match i {
            i if i < nu => i % nodes,
            i if i < nu + np => i - nu,
            _ => nodes,
        };
        let groups: Vec<usize> = reduction.free_to_full().iter().map(|&i| group(i)).collect();
        let lu = lu_factor_grouped(&reduced, &compact(groups), LuOptions { pivot_tolerance: 1e-4, use_amd: true })?;
        Ok(SaddleSolver { full, reduced, reduction, lu, nu: a.nrows, np: b.nrows })
    }

    /// Solve `A u - B^T p = f`, `-B u = -d`; returns `(u, p)`.
    pub fn solve(&self, f: &[f64], d: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rhs = vec![0.0; self.full.nrows];
        rhs[..self.nu].copy_from_slice(f);
        for (r, v) in rhs[self.nu..self.nu + self.np].iter_mut().zip(d) {
            *r = -v;
        }
        let red = self.reduction.rhs(&self.full, &rhs);
        let x = self.reduction.expand(&self.lu.solve_refined(&self.reduced, &red, 1));
        (x[..self.nu].to_vec(), x[self.nu..self.nu + self.np].to_vec())
    }
}

/// Renumber group ids to `0..k` in order of first appearance.
fn compact(groups: Vec<usize>) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    groups
        .into_iter()
        .map(|g| {
            let k = map.len();
            *map.entry(g).or_insert(k)
        })
        .collect()
}
