//! Interval meshes and structured triangulations.
//!
//! Two-dimensional meshes are generated on a uniform grid whose squares are
//! split along the lower-left to upper-right diagonal. Nodes are numbered
//! lexicographically by `(y, x)`, so the node set of level `L` is a subset of
//! the node set of level `L + 1`.

use crate::error::{Error, Result};

/// Computational domain selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Interval {
        a: f64,
        b: f64,
    },
    /// `[0, 1]²`.
    UnitSquare,
    /// `[-1, 1]²` without the open quadrant `{x > 0, y < 0}`.
    LShape,
}

impl DomainKind {
    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match *self {
            DomainKind::Interval { a, b } => b - a,
            DomainKind::UnitSquare => 1.0,
            DomainKind::LShape => 3.0,
        }
    }
}

/// Uniform mesh of `(a, b)` with `n_interior` interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub a: f64,
    pub b: f64,
    pub n_interior: usize,
    pub h: f64,
    /// `x_0 = a, ..., x_{n+1} = b`.
    pub coords: Vec<f64>,
}

impl Mesh1D {
    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.n_interior + 1
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        vec![0, self.n_interior + 1]
    }
}

pub fn make_interval_mesh(a: f64, b: f64, n_interior: usize) -> Result<Mesh1D> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::Domain(format!("interval requires a < b, got ({a}, {b})")));
    }
    if n_interior == 0 {
        return Err(Error::Domain("interval mesh needs at least one interior node".into()));
    }
    let h = (b - a) / (n_interior + 1) as f64;
    let mut coords: Vec<f64> = (0..n_interior + 2).map(|i| a + i as f64 * h).collect();
    // a + (n+1)h may round away from b
    coords[n_interior + 1] = b;
    Ok(Mesh1D { a, b, n_interior, h, coords })
}

/// Node-to-element adjacency in compressed form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeToElems {
    offsets: Vec<usize>,
    elems: Vec<usize>,
}

impl NodeToElems {
    /// Builds the inverse image of a flat `elems2nodes` table with `k` nodes per element.
    pub fn build(num_nodes: usize, elems2nodes: &[usize], k: usize) -> Self {
        let mut counts = vec![0usize; num_nodes + 1];
        for &n in elems2nodes {
            counts[n + 1] += 1;
        }
        for i in 0..num_nodes {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut elems = vec![0usize; elems2nodes.len()];
        for (e, nodes) in elems2nodes.chunks_exact(k).enumerate() {
            for &n in nodes {
                elems[fill[n]] = e;
                fill[n] += 1;
            }
        }
        NodeToElems { offsets, elems }
    }

    /// Elements containing `node`, ascending.
    pub fn patch(&self, node: usize) -> &[usize] {
        &self.elems[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Conforming triangulation together with the per-element data the energy
/// kernels consume.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub nodes: Vec<[f64; 2]>,
    pub elems2nodes: Vec<[usize; 3]>,
    pub areas: Vec<f64>,
    pub dphi_x: Vec<[f64; 3]>,
    pub dphi_y: Vec<[f64; 3]>,
    pub boundary_nodes: Vec<usize>,
    pub node2elems: NodeToElems,
    /// Generator parameters when the mesh came from [`make_structured_trimesh`].
    pub structured: Option<(DomainKind, u32)>,
}

impl TriMesh {
    /// Builds a mesh from raw topology. Triangles may have either orientation.
    /// Boundary nodes are the endpoints of edges owned by a single triangle.
    pub fn from_parts(nodes: Vec<[f64; 2]>, elems2nodes: Vec<[usize; 3]>) -> Result<Self> {
        let num_nodes = nodes.len();
        let mut areas = Vec::with_capacity(elems2nodes.len());
        let mut dphi_x = Vec::with_capacity(elems2nodes.len());
        let mut dphi_y = Vec::with_capacity(elems2nodes.len());
        for (e, tri) in elems2nodes.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&n| n >= num_nodes) {
                return Err(Error::Domain(format!("element {e} references node {bad}")));
            }
            let [p0, p1, p2] = tri.map(|n| nodes[n]);
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            if det == 0.0 || !det.is_finite() {
                return Err(Error::Domain(format!("element {e} is degenerate")));
            }
            areas.push(0.5 * det.abs());
            dphi_x.push([(p1[1] - p2[1]) / det, (p2[1] - p0[1]) / det, (p0[1] - p1[1]) / det]);
            dphi_y.push([(p2[0] - p1[0]) / det, (p0[0] - p2[0]) / det, (p1[0] - p0[0]) / det]);
        }

        let flat: Vec<usize> = elems2nodes.iter().flatten().copied().collect();
        let node2elems = NodeToElems::build(num_nodes, &flat, 3);

        let mut edges: Vec<(usize, usize)> = elems2nodes
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        edges.sort_unstable();
        let mut on_boundary = vec![false; num_nodes];
        let mut i = 0;
        while i < edges.len() {
            let mut j = i + 1;
            while j < edges.len() && edges[j] == edges[i] {
                j += 1;
            }
            if j - i == 1 {
                on_boundary[edges[i].0] = true;
                on_boundary[edges[i].1] = true;
            }
            i = j;
        }
        let boundary_nodes = (0..num_nodes).filter(|&n| on_boundary[n]).collect();

        Ok(TriMesh {
            nodes,
            elems2nodes,
            areas,
            dphi_x,
            dphi_y,
            boundary_nodes,
            node2elems,
            structured: None,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elems2nodes.len()
    }

    /// Nodes not on the boundary, ascending.
    pub fn interior_nodes(&self) -> Vec<usize> {
        complement(self.num_nodes(), &self.boundary_nodes)
    }

    /// Uniform refinement: every triangle is split into four congruent children.
    pub fn refine(&self) -> Result<TriMesh> {
        match self.structured {
            Some((kind, level)) => make_structured_trimesh(kind, level + 1),
            None => Err(Error::Domain("only structured meshes can be refined".into())),
        }
    }
}

/// Sorted complement of `subset` in `0..n`.
pub(crate) fn complement(n: usize, subset: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &i in subset {
        mark[i] = true;
    }
    (0..n).filter(|&i| !mark[i]).collect()
}

/// Structured triangulation with grid spacing `2^-(level+1)`.
pub fn make_structured_trimesh(kind: DomainKind, level: u32) -> Result<TriMesh> {
    if level > 12 {
        return Err(Error::Domain(format!("level {level} is too fine")));
    }
    let (origin, cells) = match kind {
        DomainKind::UnitSquare => (0.0, 1usize << (level + 1)),
        DomainKind::LShape => (-1.0, 1usize << (level + 2)),
        DomainKind::Interval { .. } => {
            return Err(Error::Domain("interval domains use make_interval_mesh".into()))
        }
    };
    let h = 0.5f64.powi(level as i32 + 1);
    let coord = |i: usize| origin + i as f64 * h;
    let half = cells / 2;
    // grid point (i, j) is removed when strictly inside the cut-out quadrant
    let keep_node = |i: usize, j: usize| match kind {
        DomainKind::LShape => !(i > half && j < half),
        _ => true,
    };
    // cell (i, j) has lower-left corner (i, j)
    let keep_cell = |i: usize, j: usize| match kind {
        DomainKind::LShape => !(i >= half && j < half),
        _ => true,
    };

    let stride = cells + 1;
    let mut index = vec![usize::MAX; stride * stride];
    let mut nodes = Vec::new();
    for j in 0..=cells {
        for i in 0..=cells {
            if keep_node(i, j) {
                index[j * stride + i] = nodes.len();
                nodes.push([coord(i), coord(j)]);
            }
        }
    }

    let mut elems2nodes = Vec::new();
    for j in 0..cells {
        for i in 0..cells {
            if !keep_cell(i, j) {
                continue;
            }
            let ll = index[j * stride + i];
            let lr = index[j * stride + i + 1];
            let ul = index[(j + 1) * stride + i];
            let ur = index[(j + 1) * stride + i + 1];
            elems2nodes.push([ll, lr, ur]);
            elems2nodes.push([ll, ur, ul]);
        }
    }

    let mut mesh = TriMesh::from_parts(nodes, elems2nodes)?;
    mesh.structured = Some((kind, level));
    Ok(mesh)
}

/// Either kind of mesh, for operations shared by both dimensions.
#[derive(Debug, Clone)]
pub enum Mesh {
    Interval(Mesh1D),
    Triangles(TriMesh),
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        match self {
            Mesh::Interval(m) => m.num_nodes(),
            Mesh::Triangles(m) => m.num_nodes(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Mesh::Interval(_) => 1,
            Mesh::Triangles(_) => 2,
        }
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        match self {
            Mesh::Interval(m) => m.boundary_nodes(),
            Mesh::Triangles(m) => m.boundary_nodes.clone(),
        }
    }

    /// Coordinates of node `i` (one entry in 1D, two in 2D).
    pub fn coords_of(&self, i: usize) -> Vec<f64> {
        match self {
            Mesh::Interval(m) => vec![m.coords[i]],
            Mesh::Triangles(m) => m.nodes[i].to_vec(),
        }
    }

    /// Flat element table and nodes per element.
    pub fn elements(&self) -> (Vec<usize>, usize) {
        match self {
            Mesh::Interval(m) => ((0..m.num_elements()).flat_map(|e| [e, e + 1]).collect(), 2),
            Mesh::Triangles(m) => (m.elems2nodes.iter().flatten().copied().collect(), 3),
        }
    }
}

pub fn boundary_nodes_of(mesh: &Mesh) -> Vec<usize> {
    mesh.boundary_nodes()
}
