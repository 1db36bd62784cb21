use crate::linalg::{norm_inf, DenseMatrix, SparseSymMatrix, SparsityPattern};

/// Forward-difference step for differentiating a gradient at `v`.
pub fn hessian_step(v: &[f64]) -> f64 {
    f64::EPSILON.sqrt() * norm_inf(v).max(1.0)
}

/// Sparse Hessian from one forward-difference gradient per color.
///
/// Perturbing every column of a color at once is exact with respect to the
/// pattern because same-colored columns never share a row. Uses
/// `num_colors + 1` gradient evaluations; the result is symmetrized.
pub fn hessian_colored_fd(
    grad: &mut dyn FnMut(&[f64], &mut [f64]),
    pattern: &SparsityPattern,
    v: &[f64],
) -> SparseSymMatrix {
    assert_eq!(pattern.coloring.len(), pattern.dim, "pattern has no coloring");
    let n = v.len();
    let delta = hessian_step(v);
    let mut g0 = vec![0.0; n];
    grad(v, &mut g0);

    let mut h = SparseSymMatrix::zeros(pattern);
    let mut shifted = v.to_vec();
    let mut g1 = vec![0.0; n];
    for group in pattern.color_groups() {
        for &j in &group {
            shifted[j] = v[j] + delta;
        }
        grad(&shifted, &mut g1);
        for &j in &group {
            let step = shifted[j] - v[j];
            for &i in pattern.row(j) {
                h.set(i, j, (g1[i] - g0[i]) / step);
            }
            shifted[j] = v[j];
        }
    }
    h.symmetrize();
    h
}

/// Dense Hessian by forward differences column by column (`n + 1` gradients).
pub fn hessian_dense_fd(grad: &mut dyn FnMut(&[f64], &mut [f64]), v: &[f64]) -> DenseMatrix {
    let n = v.len();
    let delta = hessian_step(v);
    let mut g0 = vec![0.0; n];
    grad(v, &mut g0);

    let mut h = DenseMatrix::zeros(n);
    let mut shifted = v.to_vec();
    let mut g1 = vec![0.0; n];
    for j in 0..n {
        shifted[j] = v[j] + delta;
        grad(&shifted, &mut g1);
        let step = shifted[j] - v[j];
        for i in 0..n {
            h[(i, j)] = (g1[i] - g0[i]) / step;
        }
        shifted[j] = v[j];
    }
    h.symmetrize();
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::color_columns;

    // gradient of 1/2 xᵀAx with A = tridiag(-1, 2 + i/n, -1)
    fn quadratic_grad(x: &[f64], g: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let mut acc = (2.0 + i as f64 / n as f64) * x[i];
            if i > 0 {
                acc -= x[i - 1];
            }
            if i + 1 < n {
                acc -= x[i + 1];
            }
            g[i] = acc;
        }
    }

    #[test]
    fn colored_recovers_tridiagonal() {
        let n = 100;
        let pattern = color_columns(&SparsityPattern::from_pairs(n, (1..n).map(|i| (i - 1, i))));
        let v: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut calls = 0;
        let h = hessian_colored_fd(
            &mut |x, g| {
                calls += 1;
                quadratic_grad(x, g)
            },
            &pattern,
            &v,
        );
        assert_eq!(calls, 4);
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..n {
            let diag = 2.0 + i as f64 / n as f64;
            err += (h.get(i, i) - diag).powi(2);
            norm += diag * diag;
            if i + 1 < n {
                err += 2.0 * (h.get(i, i + 1) + 1.0).powi(2);
                norm += 2.0;
            }
        }
        assert!((err / norm).sqrt() < 1e-6);
        assert_eq!(h.nnz(), pattern.nnz());
        assert!(!h.is_stored(0, 2));
    }

    #[test]
    fn dense_matches_colored_and_counts() {
        let n = 20;
        let pattern = color_columns(&SparsityPattern::from_pairs(n, (1..n).map(|i| (i - 1, i))));
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let mut calls = 0;
        let dense = hessian_dense_fd(
            &mut |x, g| {
                calls += 1;
                quadratic_grad(x, g)
            },
            &v,
        );
        assert_eq!(calls, n + 1);
        let sparse = hessian_colored_fd(&mut quadratic_grad, &pattern, &v);
        for (i, j) in pattern.coordinate_list() {
            assert!((dense[(i, j)] - sparse.get(i, j)).abs() <= 1e-8);
        }
    }
}
