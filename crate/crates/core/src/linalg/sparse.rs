//! Compressed sparse row storage.

use super::LinalgError;

/// Triplet accumulator. Duplicates are summed on conversion in
/// (row, column, insertion) order so results are reproducible.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Triplets { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Triplets { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        self.entries.push((r, c, v));
    }

    /// Append `scale * m` with its origin at `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, m: &SparseMatrix, scale: f64) {
        for r in 0..m.nrows {
            for k in m.row_ptr[r]..m.row_ptr[r + 1] {
                self.entries.push((r0 + r, c0 + m.col_idx[k], scale * m.values[k]));
            }
        }
    }

    /// Append `scale * m^T` with its origin at `(r0, c0)`.
    pub fn add_block_transposed(&mut self, r0: usize, c0: usize, m: &SparseMatrix, scale: f64) {
        for r in 0..m.nrows {
            for k in m.row_ptr[r]..m.row_ptr[r + 1] {
                self.entries.push((r0 + m.col_idx[k], c0 + r, scale * m.values[k]));
            }
        }
    }

    pub fn build(&self) -> Result<SparseMatrix, LinalgError> {
        SparseMatrix::from_triplets(self.nrows, self.ncols, &self.entries)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::identity(d.len());
        m.values.copy_from_slice(d);
        m
    }

    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        // Counting sort on rows keeps insertion order inside each row.
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in entries {
            if r >= nrows || c >= ncols {
                return Err(LinalgError::IndexOutOfBounds { row: r, col: c, nrows, ncols });
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut order = vec![(0usize, 0.0f64); entries.len()];
        for &(r, c, v) in entries {
            order[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        for r in 0..nrows {
            let row = &mut order[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(c, v) in row.iter() {
                if c == last {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { nrows, ncols, row_ptr, col_idx, values })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(k) => self.values[self.row_ptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        for (r, yr) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        }
    }

    /// `y = A^T x`.
    pub fn mul_vec_transposed(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k]] += self.values[k] * xr;
            }
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                col_idx[next[c]] = r;
                values[next[c]] = self.values[k];
                next[c] += 1;
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr: counts, col_idx, values }
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &SparseMatrix, b: f64) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = Triplets::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        t.add_block(0, 0, self, a);
        t.add_block(0, 0, other, b);
        t.build().expect("shapes already checked")
    }

    /// Keep rows and columns selected by the maps (`None` drops the index).
    pub fn submatrix(
        &self,
        row_map: &[Option<usize>],
        nrows: usize,
        col_map: &[Option<usize>],
        ncols: usize,
    ) -> SparseMatrix {
        let mut t = Triplets::new(nrows, ncols);
        for r in 0..self.nrows {
            let Some(rr) = row_map[r] else { continue };
            for (c, v) in self.row(r) {
                if let Some(cc) = col_map[c] {
                    t.push(rr, cc, v);
                }
            }
        }
        t.build().expect("maps are within bounds")
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] += v;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let t = self.transpose();
        let diff = self.linear_combination(1.0, &t, -1.0);
        diff.max_abs() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
        let e = SparseMatrix::from_triplets(3, 3, &[]).unwrap();
        assert_eq!(e.nnz(), 0);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn spmv_matches_dense(
            entries in proptest::collection::vec((0usize..7, 0usize..5, -3.0f64..3.0), 0..40),
            x in proptest::collection::vec(-2.0f64..2.0, 5),
        ) {
            let m = SparseMatrix::from_triplets(7, 5, &entries).unwrap();
            let mut dense = [[0.0f64; 5]; 7];
            for &(r, c, v) in &entries {
                dense[r][c] += v;
            }
            let y = m.mul_vec(&x);
            for r in 0..7 {
                let e: f64 = (0..5).map(|c| dense[r][c] * x[c]).sum();
                prop_assert!((y[r] - e).abs() < 1e-12);
            }
            let yt = m.transpose().mul_vec(&y);
            let yt2 = m.mul_vec_transposed(&y);
            for c in 0..5 {
                prop_assert!((yt[c] - yt2[c]).abs() < 1e-12);
            }
            // Sorted, duplicate free rows.
            for r in 0..7 {
                let cols: Vec<usize> = m.row(r).map(|e| e.0).collect();
                prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
