//! Dense symmetric eigensolvers sized for this project's matrices
//! (a few hundred rows at most, with grid oracles up to a few thousand
//! in the tridiagonal path).

mod householder;
mod jacobi;
mod tridiag;

pub use householder::tridiagonalize;
pub use jacobi::jacobi_eigen;
pub use tridiag::{sturm_count, tridiagonal_eigenvalues};

/// Eigenvalues of a dense symmetric matrix without eigenvectors, via
/// Householder reduction to tridiagonal form plus Sturm bisection.
/// Ascending order.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize, n_lowest: usize) -> Vec<f64> {
    let (diag, off) = tridiagonalize(matrix, n);
    tridiagonal_eigenvalues(&diag, &off, n_lowest)
}
