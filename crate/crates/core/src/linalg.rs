//! Small dense linear-algebra helpers shared across the crate. Fiber
//! matrices stay tiny (a handful of vertices), so everything is dense and
//! exact eigendecompositions are cheap.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues of a Hermitian matrix, sorted ascending.
pub fn hermitian_eigenvalues(matrix: &DMatrix<Complex64>) -> Vec<f64> {
    let mut values: Vec<f64> = matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    values
}

/// Full eigendecomposition of a Hermitian matrix with eigenpairs sorted by
/// ascending eigenvalue.
pub fn hermitian_eigenpairs(matrix: &DMatrix<Complex64>) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let decomp = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..decomp.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a]
            .partial_cmp(&decomp.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let values = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| decomp.eigenvectors.column(i).into_owned())
        .collect();
    (values, vectors)
}

/// Number of singular values above `threshold`.
pub fn numerical_rank(matrix: &DMatrix<Complex64>, threshold: f64) -> usize {
    matrix
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}

/// Largest absolute difference between two sorted eigenvalue lists.
pub fn max_sorted_deviation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
