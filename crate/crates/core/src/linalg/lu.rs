//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Columns are ordered by approximate minimum degree on the pattern of
//! `A + A^T`. Each column is obtained by a sparse triangular solve whose
//! nonzero pattern comes from a depth-first reach through `L`. The diagonal
//! entry is kept as pivot when it is within `pivot_tolerance` of the column
//! maximum, which preserves the fill-reducing ordering on nearly symmetric
//! systems.

use super::sparse::SparseMatrix;
use super::LinalgError;

const SINGULAR_RATIO: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
pub struct LuOptions {
    pub pivot_tolerance: f64,
    pub use_amd: bool,
}

impl Default for LuOptions {
    fn default() -> Self {
        LuOptions { pivot_tolerance: 0.01, use_amd: true }
    }
}

/// `P A Q = L U` with `L` unit lower triangular.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    /// Column order: step `k` eliminated column `q[k]`.
    q: Vec<usize>,
    /// Row permutation: row `i` became pivot row `pinv[i]`.
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
}

impl LuFactorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn fill(&self) -> usize {
        self.l_val.len() + self.u_val.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                    y[self.l_idx[p]] -= self.l_val[p] * yj;
                }
            }
        }
        for j in (0..n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u_ptr[j]..last {
                    y[self.u_idx[p]] -= self.u_val[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        x
    }

    /// Solve with a few steps of iterative refinement against `a`.
    pub fn solve_refined(&self, a: &SparseMatrix, b: &[f64], steps: usize) -> Vec<f64> {
        let mut x = self.solve(b);
        for _ in 0..steps {
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let dx = self.solve(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        }
        x
    }

    /// Solve `A^T x = b`.
    pub fn solve_transposed(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        // A^T = Q U^T L^T P, so solve U^T z = Q^T b, then L^T w = z, x = P^T w.
        let mut z: Vec<f64> = (0..n).map(|k| b[self.q[k]]).collect();
        for j in 0..n {
            let last = self.u_ptr[j + 1] - 1;
            let mut s = z[j];
            for p in self.u_ptr[j]..last {
                s -= self.u_val[p] * z[self.u_idx[p]];
            }
            z[j] = s / self.u_val[last];
        }
        for j in (0..n).rev() {
            let mut s = z[j];
            for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                s -= self.l_val[p] * z[self.l_idx[p]];
            }
            z[j] = s;
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = z[self.pinv[i]];
        }
        x
    }
}

pub fn lu_factor(a: &SparseMatrix) -> Result<LuFactorization, LinalgError> {
    lu_factor_with(a, LuOptions::default())
}

pub fn lu_factor_with(a: &SparseMatrix, opts: LuOptions) -> Result<LuFactorization, LinalgError> {
    if a.nrows != a.ncols {
        return Err(LinalgError::NotSquare { nrows: a.nrows, ncols: a.ncols });
    }
    let n = a.nrows;
    let at = a.transpose();
    let q = if opts.use_amd && n > 0 { amd_order(n, &at.row_ptr, &at.col_idx)? } else { (0..n).collect() };
    factor_in_order(&at, q, opts)
}

/// Factor with the fill-reducing order computed on the quotient graph of
/// `groups` (one group id per row and column). Members of a group are
/// eliminated consecutively in index order. Grouping the pressure of a
/// vertex with its velocities keeps zero-diagonal pressure columns behind
/// their velocity neighbours.
pub fn lu_factor_grouped(a: &SparseMatrix, groups: &[usize], opts: LuOptions) -> Result<LuFactorization, LinalgError> {
    if a.nrows != a.ncols {
        return Err(LinalgError::NotSquare { nrows: a.nrows, ncols: a.ncols });
    }
    assert_eq!(groups.len(), a.nrows, "one group per row");
    let at = a.transpose();
    let ng = groups.iter().max().map_or(0, |g| g + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ng];
    for (i, &g) in groups.iter().enumerate() {
        members[g].push(i);
    }
    let mut gp = vec![0usize; ng + 1];
    let mut gi = Vec::new();
    let mut seen = vec![usize::MAX; ng];
    for (g, rows) in members.iter().enumerate() {
        for &i in rows {
            for &j in &at.col_idx[at.row_ptr[i]..at.row_ptr[i + 1]] {
                let h = groups[j];
                if seen[h] != g {
                    seen[h] = g;
                    gi.push(h);
                }
            }
        }
        gp[g + 1] = gi.len();
        gi[gp[g]..].sort_unstable();
    }
    let order = if ng > 0 { amd_order(ng, &gp, &gi)? } else { Vec::new() };
    let q: Vec<usize> = order.iter().flat_map(|&g| members[g].iter().copied()).collect();
    factor_in_order(&at, q, opts)
}

/// Left-looking factorization of the matrix whose transpose is `at`,
/// eliminating columns in the order `q`.
fn factor_in_order(at: &SparseMatrix, q: Vec<usize>, opts: LuOptions) -> Result<LuFactorization, LinalgError> {
    let n = at.nrows;
    // Columns of A are the rows of A^T.
    let (cp, ci, cx) = (&at.row_ptr, &at.col_idx, &at.values);

    let col_max: Vec<f64> = (0..n)
        .map(|j| cx[cp[j]..cp[j + 1]].iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();

    const NONE: usize = usize::MAX;
    let mut pinv = vec![NONE; n];
    let cap = 4 * at.nnz() + n;
    let mut l_ptr = Vec::with_capacity(n + 1);
    let mut l_idx: Vec<usize> = Vec::with_capacity(cap);
    let mut l_val: Vec<f64> = Vec::with_capacity(cap);
    let mut u_ptr = Vec::with_capacity(n + 1);
    let mut u_idx: Vec<usize> = Vec::with_capacity(cap);
    let mut u_val: Vec<f64> = Vec::with_capacity(cap);

    let mut x = vec![0.0; n];
    let mut xi = vec![0usize; n];
    let mut stack = vec![0usize; n];
    let mut pstack = vec![0usize; n];
    let mut marked = vec![false; n];

    for k in 0..n {
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
        let col = q[k];

        // Reach: topological order of the nonzero pattern of L \ A(:, col).
        let mut top = n;
        for &start in &ci[cp[col]..cp[col + 1]] {
            if marked[start] {
                continue;
            }
            let mut head = 0usize;
            stack[0] = start;
            loop {
                let j = stack[head];
                let jl = pinv[j];
                if !marked[j] {
                    marked[j] = true;
                    pstack[head] = if jl == NONE { 0 } else { l_ptr[jl] };
                }
                let end = if jl == NONE { 0 } else { l_ptr_end(&l_ptr, jl, l_idx.len()) };
                let mut done = true;
                let mut p = pstack[head];
                while p < end {
                    let i = l_idx[p];
                    p += 1;
                    if !marked[i] {
                        pstack[head] = p;
                        head += 1;
                        stack[head] = i;
                        done = false;
                        break;
                    }
                }
                if done {
                    top -= 1;
                    xi[top] = j;
                    if head == 0 {
                        break;
                    }
                    head -= 1;
                }
            }
        }
        for &j in &xi[top..n] {
            marked[j] = false;
        }

        // Numeric triangular solve.
        for &j in &xi[top..n] {
            x[j] = 0.0;
        }
        for p in cp[col]..cp[col + 1] {
            x[ci[p]] = cx[p];
        }
        for px in top..n {
            let j = xi[px];
            let jl = pinv[j];
            if jl == NONE {
                continue;
            }
            let xj = x[j];
            if xj != 0.0 {
                // Column jl of L starts with its unit diagonal.
                for p in l_ptr[jl] + 1..l_ptr_end(&l_ptr, jl, l_idx.len()) {
                    x[l_idx[p]] -= l_val[p] * xj;
                }
            }
        }

        // Pivot choice.
        let mut ipiv = NONE;
        let mut amax = -1.0f64;
        for &i in &xi[top..n] {
            if pinv[i] == NONE {
                let t = x[i].abs();
                if t > amax {
                    amax = t;
                    ipiv = i;
                }
            } else {
                u_idx.push(pinv[i]);
                u_val.push(x[i]);
            }
        }
        if ipiv == NONE || !(amax > SINGULAR_RATIO * col_max[col]) || !amax.is_finite() {
            return Err(LinalgError::SingularMatrix { pivot: k });
        }
        if pinv[col] == NONE && x[col].abs() >= amax * opts.pivot_tolerance {
            ipiv = col;
        }
        let pivot = x[ipiv];
        u_idx.push(k);
        u_val.push(pivot);
        pinv[ipiv] = k;
        l_idx.push(ipiv);
        l_val.push(1.0);
        for &i in &xi[top..n] {
            if pinv[i] == NONE {
                l_idx.push(i);
                l_val.push(x[i] / pivot);
            }
            x[i] = 0.0;
        }
    }
    l_ptr.push(l_idx.len());
    u_ptr.push(u_idx.len());
    for i in l_idx.iter_mut() {
        *i = pinv[*i];
    }
    Ok(LuFactorization { n, q, pinv, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val })
}

#[inline]
fn l_ptr_end(l_ptr: &[usize], j: usize, len: usize) -> usize {
    if j + 1 < l_ptr.len() {
        l_ptr[j + 1]
    } else {
        len
    }
}

fn amd_order(n: usize, cp: &[usize], ci: &[usize]) -> Result<Vec<usize>, LinalgError> {
    let ap: Vec<isize> = cp.iter().map(|&v| v as isize).collect();
    let ai: Vec<isize> = ci.iter().map(|&v| v as isize).collect();
    let (p, _, _) = amd::order(n as isize, &ap, &ai, &amd::Control::default())
        .map_err(|s| LinalgError::Ordering(format!("{s:?}")))?;
    Ok(p.into_iter().map(|v| v as usize).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::Triplets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.mul_vec(x);
        let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        r / b.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn two_by_two_with_offdiagonal_pivot() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let f = lu_factor(&a).unwrap();
        let x = f.solve(&[1.0, 2.0]);
        assert_eq!(x, vec![2.0, 1.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 2.0), (1, 1, 2.0)])
            .unwrap();
        assert!(matches!(lu_factor(&a), Err(LinalgError::SingularMatrix { .. })));
    }

    #[test]
    fn random_saddle_point_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10 {
            let (nu, np) = (40 + trial * 7, 10 + trial);
            let mut t = Triplets::new(nu + np, nu + np);
            for i in 0..nu {
                t.push(i, i, 4.0 + rng.random::<f64>());
                for _ in 0..3 {
                    let j = rng.random_range(0..nu);
                    let v = rng.random::<f64>() - 0.5;
                    t.push(i, j, v);
                    t.push(j, i, v);
                }
            }
            for p in 0..np {
                for _ in 0..4 {
                    let j = rng.random_range(0..nu);
                    let v = rng.random::<f64>() - 0.5;
                    t.push(nu + p, j, v);
                    t.push(j, nu + p, v);
                }
                t.push(nu + p, p, 1.0);
                t.push(p, nu + p, 1.0);
            }
            let a = t.build().unwrap();
            let b: Vec<f64> = (0..nu + np).map(|_| rng.random::<f64>() - 0.5).collect();
            let f = lu_factor(&a).unwrap();
            let x = f.solve(&b);
            assert!(residual(&a, &x, &b) < 1e-10, "trial {trial}");
            let xt = f.solve_transposed(&b);
            assert!(residual(&a.transpose(), &xt, &b) < 1e-10);
        }
    }

    #[test]
    fn grouped_order_solves_saddle_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (nu, np) = (60, 15);
        let mut t = Triplets::new(nu + np, nu + np);
        for i in 0..nu {
            t.push(i, i, 4.0 + rng.random::<f64>());
            let j = (i + 1) % nu;
            let v = rng.random::<f64>() - 0.5;
            t.push(i, j, v);
            t.push(j, i, -v);
        }
        for p in 0..np {
            for k in 0..4 {
                let v = rng.random::<f64>() - 0.5;
                t.push(nu + p, 4 * p + k, v);
                t.push(4 * p + k, nu + p, v);
            }
        }
        let a = t.build().unwrap();
        let groups: Vec<usize> = (0..nu).map(|i| i / 4).chain(0..np).collect();
        let b: Vec<f64> = (0..nu + np).map(|_| rng.random::<f64>() - 0.5).collect();
        for tol in [1e-4, 0.01, 1.0] {
            let f = lu_factor_grouped(&a, &groups, LuOptions { pivot_tolerance: tol, use_amd: true }).unwrap();
            assert!(residual(&a, &f.solve(&b), &b) < 1e-10, "tol {tol}");
        }
    }

    #[test]
    fn unsymmetric_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 30;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 0.01);
            for _ in 0..5 {
                t.push(i, rng.random_range(0..n), rng.random::<f64>() * 2.0 - 1.0);
            }
        }
        let a = t.build().unwrap();
        let d = a.to_dense();
        let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| d[i][j]);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let xd = dm.lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        let x = lu_factor(&a).unwrap().solve(&b);
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-9 * (1.0 + xd[i].abs()));
        }
    }
}
