//! Sparse matrices, direct solves and extreme eigenvalues.

pub mod eigen;
pub mod lu;
pub mod sparse;

pub use eigen::{
    dense_generalized_eigen, min_schur_eigenvalue, rayleigh_maximize, smallest_singular_value,
    QuotientMaximum, QuotientProblem,
};
pub use lu::{lu_factor, lu_factor_grouped, lu_factor_with, LuFactorization, LuOptions};
pub use sparse::{axpy, dot, norm2, SparseMatrix, Triplets};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("zero pivot at elimination step {pivot}")]
    SingularMatrix { pivot: usize },
    #[error("matrix is {nrows}x{ncols}, expected square")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfBounds { row: usize, col: usize, nrows: usize, ncols: usize },
    #[error("fill-reducing ordering failed: {0}")]
    Ordering(String),
    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("iteration did not converge in {iterations} steps")]
    NoConvergence { iterations: usize },
    #[error("empty problem")]
    Empty,
}
