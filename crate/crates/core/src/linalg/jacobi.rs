//! Cyclic Jacobi rotations for dense symmetric matrices. Converges to
//! machine precision and keeps eigenvectors orthonormal by construction,
//! which the spectrum stage relies on.

/// Eigen-decomposition of a symmetric matrix (row-major, n×n).
/// Returns eigenvalues in descending order and eigenvectors as columns of
/// the second value (row-major n×n, column k pairs with eigenvalue k).
/// The matrix must be exactly symmetric; the caller symmetrizes first.
///
/// # Panics
/// Panics if the sweep cap is exceeded, which for symmetric input would
/// indicate non-finite entries.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(matrix.len(), n * n, "matrix size mismatch");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 0..64 {
        let off_diag: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].abs())
            .sum();
        if off_diag == 0.0 {
            break;
        }
        // First sweeps rotate only clearly significant entries.
        let threshold = if sweep < 3 { 0.2 * off_diag / (n * n) as f64 } else { 0.0 };
        for i in 0..(n - 1) {
            for j in (i + 1)..n {
                let g = 100.0 * a[i * n + j].abs();
                if sweep > 3 && d[i].abs() + g == d[i].abs() && d[j].abs() + g == d[j].abs() {
                    a[i * n + j] = 0.0;
                    continue;
                }
                if a[i * n + j].abs() <= threshold {
                    continue;
                }
                let h = d[j] - d[i];
                let t = if h.abs() + g == h.abs() {
                    a[i * n + j] / h
                } else {
                    let theta = 0.5 * h / a[i * n + j];
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * a[i * n + j];
                z[i] -= h;
                z[j] += h;
                d[i] -= h;
                d[j] += h;
                a[i * n + j] = 0.0;
                let rotate = |a: &mut [f64], p: usize, q: usize| {
                    let g = a[p];
                    let h = a[q];
                    a[p] = g - s * (h + g * tau);
                    a[q] = h + s * (g - h * tau);
                };
                for k in 0..i {
                    rotate(&mut a, k * n + i, k * n + j);
                }
                for k in (i + 1)..j {
                    rotate(&mut a, i * n + k, k * n + j);
                }
                for k in (j + 1)..n {
                    rotate(&mut a, i * n + k, j * n + k);
                }
                for k in 0..n {
                    rotate(&mut v, k * n + i, k * n + j);
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
        if sweep == 63 {
            panic!("jacobi did not converge in 64 sweeps");
        }
    }

    // Sort descending by eigenvalue, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| d[q].total_cmp(&d[p]));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = v[row * n + old_col];
        }
    }
    (values, vectors)
}
