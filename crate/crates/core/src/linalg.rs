//! Compressed-row symmetric matrices, sparsity patterns with column coloring,
//! and a small dense matrix for the pattern-free solver configurations.

use crate::error::{Error, Result};

/// Symmetric nonzero structure in compressed rows, optionally with a
/// structurally orthogonal column coloring.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparsityPattern {
    pub dim: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    /// Color per column; empty until [`color_columns`] runs.
    pub coloring: Vec<usize>,
    pub num_colors: usize,
}

impl SparsityPattern {
    /// Builds a symmetric pattern containing the full diagonal plus both
    /// orientations of every pair in `pairs`.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rows: Vec<Vec<usize>> = (0..dim).map(|i| vec![i]).collect();
        for (i, j) in pairs {
            rows[i].push(j);
            rows[j].push(i);
        }
        let mut row_offsets = Vec::with_capacity(dim + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            col_indices.extend_from_slice(&row);
            row_offsets.push(col_indices.len());
        }
        SparsityPattern { dim, row_offsets, col_indices, coloring: Vec::new(), num_colors: 0 }
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).iter().all(|&j| self.contains(j, i)))
    }

    pub fn has_full_diagonal(&self) -> bool {
        (0..self.dim).all(|i| self.contains(i, i))
    }

    /// All `(i, j)` positions in row-major order.
    pub fn coordinate_list(&self) -> Vec<(usize, usize)> {
        (0..self.dim).flat_map(|i| self.row(i).iter().map(move |&j| (i, j))).collect()
    }

    /// Principal sub-pattern on the sorted index set `keep`, renumbered to
    /// `0..keep.len()`. The coloring is dropped.
    pub fn restrict(&self, keep: &[usize]) -> SparsityPattern {
        let mut new_index = vec![usize::MAX; self.dim];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut row_offsets = Vec::with_capacity(keep.len() + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0);
        for &i in keep {
            col_indices.extend(self.row(i).iter().map(|&j| new_index[j]).filter(|&j| j != usize::MAX));
            row_offsets.push(col_indices.len());
        }
        SparsityPattern { dim: keep.len(), row_offsets, col_indices, coloring: Vec::new(), num_colors: 0 }
    }

    /// Columns grouped by color, each group ascending.
    pub fn color_groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_colors];
        for (j, &c) in self.coloring.iter().enumerate() {
            groups[c].push(j);
        }
        groups
    }

    /// Checks that no two columns of one color share a row.
    pub fn coloring_is_valid(&self) -> bool {
        if self.coloring.len() != self.dim {
            return false;
        }
        let mut owner = vec![usize::MAX; self.dim];
        for group in self.color_groups() {
            for &j in &group {
                // symmetric structure: rows of column j are the entries of row j
                for &i in self.row(j) {
                    if owner[i] != usize::MAX {
                        return false;
                    }
                    owner[i] = j;
                }
            }
            for &j in &group {
                for &i in self.row(j) {
                    owner[i] = usize::MAX;
                }
            }
        }
        true
    }
}

/// Greedy column coloring in natural order on the column-intersection graph.
///
/// Column `j` receives the smallest color not used by an earlier column that
/// shares a row with it. The input must have symmetric structure.
pub fn color_columns(pattern: &SparsityPattern) -> SparsityPattern {
    let n = pattern.dim;
    let mut coloring = vec![usize::MAX; n];
    let mut stamp = vec![usize::MAX; n + 1];
    let mut num_colors = 0;
    for j in 0..n {
        for &i in pattern.row(j) {
            for &k in pattern.row(i) {
                let c = coloring[k];
                if c != usize::MAX {
                    stamp[c] = j;
                }
            }
        }
        let c = (0..).find(|&c| stamp[c] != j).unwrap();
        coloring[j] = c;
        num_colors = num_colors.max(c + 1);
    }
    SparsityPattern { coloring, num_colors, ..pattern.clone() }
}

/// Symmetric matrix stored as full compressed rows (both triangles).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    pub dim: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn zeros(pattern: &SparsityPattern) -> Self {
        SparseSymMatrix {
            dim: pattern.dim,
            row_offsets: pattern.row_offsets.clone(),
            col_indices: pattern.col_indices.clone(),
            values: vec![0.0; pattern.nnz()],
        }
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_offsets[i];
        let row = &self.col_indices[start..self.row_offsets[i + 1]];
        row.binary_search(&j).ok().map(|k| start + k)
    }

    /// Entry `(i, j)`, zero when structurally absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn is_stored(&self, i: usize, j: usize) -> bool {
        self.position(i, j).is_some()
    }

    /// Adds to a stored entry. Panics when `(i, j)` is outside the structure.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("({i}, {j}) not in pattern"));
        self.values[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("({i}, {j}) not in pattern"));
        self.values[k] = v;
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Replaces the values by `(A + Aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.dim {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                if j > i {
                    let t = self.position(j, i).expect("structure must be symmetric");
                    let avg = 0.5 * (self.values[k] + self.values[t]);
                    self.values[k] = avg;
                    self.values[t] = avg;
                }
            }
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| {
            (self.row_offsets[i]..self.row_offsets[i + 1]).all(|k| {
                let j = self.col_indices[k];
                self.position(j, i).is_some_and(|t| (self.values[k] - self.values[t]).abs() <= tol)
            })
        })
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.values[self.row_offsets[i]..self.row_offsets[i + 1]].iter().sum())
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                d[(i, self.col_indices[k])] = self.values[k];
            }
        }
        d
    }

    /// Structure of the stored entries as a pattern.
    pub fn pattern(&self) -> SparsityPattern {
        SparsityPattern {
            dim: self.dim,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            coloring: Vec::new(),
            num_colors: 0,
        }
    }
}

/// Square row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Symmetric linear map used by the trust-region subproblem.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `y += alpha x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
