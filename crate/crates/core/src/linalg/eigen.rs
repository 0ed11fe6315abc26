//! Extreme eigenvalues of the small set of symmetric problems the solver
//! needs: Schur complements of saddle systems and nonlinear Rayleigh
//! quotients.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lu::lu_factor;
use super::sparse::{SparseMatrix, Triplets};
use super::LinalgError;

/// Eigenvalues (ascending) and eigenvectors of the symmetric-definite pencil
/// `(a, b)`.
pub fn dense_generalized_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>), LinalgError> {
    let n = a.nrows();
    let chol = b.clone().cholesky().ok_or(LinalgError::NotPositiveDefinite)?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(LinalgError::NotPositiveDefinite)?;
    let mut c = &linv * a * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = linv.transpose() * DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    Ok((vals, vecs))
}

/// Smallest eigenvalue of `B K^{-1} B^T` relative to the Gram matrix `M`.
///
/// `coupling` is `np x nu`, `gram_u` is `nu x nu` and `gram_p` is `np x np`.
/// Uses block inverse iteration with a factored saddle system and
/// Rayleigh-Ritz on the block.
pub fn min_schur_eigenvalue(
    coupling: &SparseMatrix,
    gram_u: &SparseMatrix,
    gram_p: &SparseMatrix,
    tol: f64,
) -> Result<f64, LinalgError> {
    let (np, nu) = (coupling.nrows, coupling.ncols);
    let mut t = Triplets::new(nu + np, nu + np);
    t.add_block(0, 0, gram_u, 1.0);
    t.add_block_transposed(0, nu, coupling, 1.0);
    t.add_block(nu, 0, coupling, 1.0);
    let aug = t.build()?;
    let lu = lu_factor(&aug)?;
    let apply_inverse = |rhs: &[f64]| -> Vec<f64> {
        let mut b = vec![0.0; nu + np];
        for (i, v) in rhs.iter().enumerate() {
            b[nu + i] = -v;
        }
        lu.solve(&b)[nu..].to_vec()
    };
    subspace_min_eigen(np, gram_p, &apply_inverse, tol)
}

/// Smallest singular value of a sparse matrix, via the Schur complement of
/// the augmented system `[[I, A], [A^T, 0]]`.
pub fn smallest_singular_value(a: &SparseMatrix, tol: f64) -> Result<f64, LinalgError> {
    let (coupling, nu, np) = if a.nrows >= a.ncols {
        (a.transpose(), a.nrows, a.ncols)
    } else {
        (a.clone(), a.ncols, a.nrows)
    };
    let lam = min_schur_eigenvalue(
        &coupling,
        &SparseMatrix::identity(nu),
        &SparseMatrix::identity(np),
        tol,
    )?;
    Ok(lam.max(0.0).sqrt())
}

/// Block inverse iteration for the smallest eigenvalue of `S x = lam M x`
/// given `x -> S^{-1} y`.
fn subspace_min_eigen(
    n: usize,
    gram: &SparseMatrix,
    inverse: &dyn Fn(&[f64]) -> Vec<f64>,
    tol: f64,
) -> Result<f64, LinalgError> {
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    let m = n.min(8);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Vec<f64>> =
        (0..m).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    let mut last = f64::INFINITY;
    for _ in 0..1000 {
        let mx: Vec<Vec<f64>> = x.iter().map(|v| gram.mul_vec(v)).collect();
        let y: Vec<Vec<f64>> = mx.iter().map(|v| inverse(v)).collect();
        let my: Vec<Vec<f64>> = y.iter().map(|v| gram.mul_vec(v)).collect();
        // Projected pencil: Y^T S Y = Y^T M X, Y^T M Y.
        let sa = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&y[i], &mx[j]) + dot(&y[j], &mx[i])));
        let sb = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
        let scale = sb.diagonal().max();
        let (vals, vecs) = dense_generalized_eigen(&(sa / scale), &(sb / scale))?;
        x = (0..m)
            .map(|c| {
                let mut v = vec![0.0; n];
                for (r, yr) in y.iter().enumerate() {
                    let w = vecs[(r, c)];
                    v.iter_mut().zip(yr).for_each(|(a, b)| *a += w * b);
                }
                v
            })
            .collect();
        let lam = vals[0];
        if (lam - last).abs() <= tol * lam.abs() {
            return Ok(lam);
        }
        last = lam;
    }
    Err(LinalgError::NoConvergence { iterations: 1000 })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximize `F(v)^(1/2) / a(v, v)` for a convex, 4-homogeneous `F` over a
/// linear space.
pub struct QuotientProblem<'a> {
    /// `a(v, v)`.
    pub energy: &'a dyn Fn(&[f64]) -> f64,
    /// `F(v)` and its gradient as a dual vector.
    pub functional: &'a dyn Fn(&[f64]) -> (f64, Vec<f64>),
    /// Riesz representer in the `a` inner product, projected to the space.
    pub riesz: &'a dyn Fn(&[f64]) -> Vec<f64>,
    /// Random admissible start.
    pub sample: &'a dyn Fn(&mut ChaCha8Rng) -> Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct QuotientMaximum {
    pub ratio: f64,
    pub argmax: Vec<f64>,
    pub ratios_per_start: Vec<f64>,
    /// Objective after each iteration of the winning start.
    pub trace: Vec<f64>,
}

/// Power-type ascent `v <- riesz(grad F(v))`, normalized each step. For a
/// convex functional on the energy unit sphere every step is non-decreasing.
pub fn rayleigh_maximize(
    problem: &QuotientProblem<'_>,
    restarts: usize,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<QuotientMaximum, LinalgError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio = |v: &[f64]| -> f64 {
        let (f, _) = (problem.functional)(v);
        f.sqrt() / (problem.energy)(v)
    };
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut per_start = Vec::with_capacity(restarts);
    for _ in 0..restarts.max(1) {
        let mut v = (problem.sample)(&mut rng);
        let e = (problem.energy)(&v);
        if !(e > 0.0) {
            return Err(LinalgError::Empty);
        }
        v.iter_mut().for_each(|x| *x /= e.sqrt());
        let mut r = ratio(&v);
        let mut trace = vec![r];
        for _ in 0..max_iter {
            let (_, g) = (problem.functional)(&v);
            let mut w = (problem.riesz)(&g);
            let e = (problem.energy)(&w);
            if !(e > 0.0) {
                break;
            }
            w.iter_mut().for_each(|x| *x /= e.sqrt());
            let rn = ratio(&w);
            v = w;
            let done = (rn - r).abs() <= tol * rn.abs();
            r = rn;
            trace.push(r);
            if done {
                break;
            }
        }
        per_start.push(r);
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, v, trace));
        }
    }
    let (ratio, argmax, trace) = best.expect("at least one start");
    Ok(QuotientMaximum { ratio, argmax, ratios_per_start: per_start, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_singular_value_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (m, n) in [(12, 12), (20, 9), (7, 15)] {
            let mut t = Triplets::new(m, n);
            for i in 0..m {
                for j in 0..n {
                    if rng.random::<f64>() < 0.5 {
                        t.push(i, j, rng.random::<f64>() - 0.5);
                    }
                }
            }
            for i in 0..m.min(n) {
                t.push(i, i, 1.0);
            }
            let a = t.build().unwrap();
            let d = a.to_dense();
            let dm = DMatrix::from_fn(m, n, |i, j| d[i][j]);
            let sv = dm.singular_values();
            let oracle = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            let s = smallest_singular_value(&a, 1e-13).unwrap();
            assert!((s - oracle).abs() <= 1e-8 * oracle.max(1e-3), "{m}x{n}: {s} vs {oracle}");
        }
    }

    #[test]
    fn generalized_pencil() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let (vals, vecs) = dense_generalized_eigen(&a, &b).unwrap();
        assert!((vals[0] - 0.5).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let v0 = vecs.column(0);
        assert!((v0.transpose() * &b * v0)[(0, 0)] - 1.0 < 1e-14);
    }

    #[test]
    fn quotient_on_finite_dimensional_model() {
        // F(v) = sum v_i^4, a = identity on R^3: max of |v|_4^2 / |v|_2^2 is 1
        // attained at coordinate vectors.
        let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let functional = |v: &[f64]| {
            (v.iter().map(|x| x.powi(4)).sum::<f64>(), v.iter().map(|x| 4.0 * x.powi(3)).collect())
        };
        let riesz = |g: &[f64]| g.to_vec();
        let sample = |r: &mut ChaCha8Rng| (0..3).map(|_| r.random::<f64>() - 0.5).collect();
        let p = QuotientProblem { energy: &energy, functional: &functional, riesz: &riesz, sample: &sample };
        let m = rayleigh_maximize(&p, 5, 1, 1e-14, 500).unwrap();
        assert!((m.ratio - 1.0).abs() < 1e-10);
    }
}
