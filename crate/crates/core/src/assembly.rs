//! Mass matrices, load vectors and Hessian sparsity patterns.

use crate::error::Result;
use crate::linalg::{check_len, SparseSymMatrix, SparsityPattern};
use crate::mesh::{Mesh, Mesh1D, TriMesh};

/// Tridiagonal P1 mass matrix of a uniform interval mesh.
pub fn mass_matrix_1d(mesh: &Mesh1D) -> SparseSymMatrix {
    let n = mesh.num_nodes();
    let h = mesh.h;
    let mut m = SparseSymMatrix::zeros(&hessian_sparsity_1d(mesh));
    for i in 0..n {
        let corner = i == 0 || i == n - 1;
        m.set(i, i, h * if corner { 1.0 / 3.0 } else { 2.0 / 3.0 });
        if i + 1 < n {
            m.set(i, i + 1, h / 6.0);
            m.set(i + 1, i, h / 6.0);
        }
    }
    m
}

/// P1 mass matrix on triangles, assembled from the local matrices
/// `|T|/12 * [[2,1,1],[1,2,1],[1,1,2]]` in element order.
pub fn mass_matrix_2d(mesh: &TriMesh) -> SparseSymMatrix {
    let mut m = SparseSymMatrix::zeros(&hessian_sparsity_2d(mesh));
    for (tri, &area) in mesh.elems2nodes.iter().zip(&mesh.areas) {
        for (a, &i) in tri.iter().enumerate() {
            for (c, &j) in tri.iter().enumerate() {
                let w = if a == c { 2.0 } else { 1.0 };
                m.add(i, j, w * area / 12.0);
            }
        }
    }
    m
}

pub fn mass_matrix(mesh: &Mesh) -> SparseSymMatrix {
    match mesh {
        Mesh::Interval(m) => mass_matrix_1d(m),
        Mesh::Triangles(m) => mass_matrix_2d(m),
    }
}

/// `b = M f` for a load given by its nodal values.
pub fn load_vector(mass: &SparseSymMatrix, f_nodal: &[f64]) -> Result<Vec<f64>> {
    check_len(mass.dim, f_nodal.len())?;
    let mut b = vec![0.0; mass.dim];
    mass.mul_vec(f_nodal, &mut b);
    Ok(b)
}

/// Tridiagonal structure coupling consecutive interval nodes.
pub fn hessian_sparsity_1d(mesh: &Mesh1D) -> SparsityPattern {
    let n = mesh.num_nodes();
    SparsityPattern::from_pairs(n, (1..n).map(|i| (i - 1, i)))
}

/// `(i, j)` is present iff `i == j` or nodes `i` and `j` share an edge.
/// Only `elems2nodes` is consulted.
pub fn hessian_sparsity_2d(mesh: &TriMesh) -> SparsityPattern {
    SparsityPattern::from_pairs(
        mesh.num_nodes(),
        mesh.elems2nodes.iter().flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]),
    )
}

pub fn hessian_sparsity(mesh: &Mesh) -> SparsityPattern {
    match mesh {
        Mesh::Interval(m) => hessian_sparsity_1d(m),
        Mesh::Triangles(m) => hessian_sparsity_2d(m),
    }
}
