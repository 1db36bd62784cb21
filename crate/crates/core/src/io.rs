//! Plain-text mesh files, sparsity dumps and solution CSVs.
//!
//! Mesh file layout:
//!
//! ```text
//! nodes <N> <dim>
//! <x> [<y>]            (N lines)
//! elements <T> <k>
//! <i_1> ... <i_k>      (T lines, 0-based)
//! boundary <m>
//! <i>                  (m lines, 0-based)
//! ```
//!
//! Reals are written in shortest round-trip form.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::SparsityPattern;
use crate::mesh::{make_interval_mesh, Mesh, TriMesh};

/// Raw contents of a mesh file.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFile {
    pub dim: usize,
    pub coords: Vec<Vec<f64>>,
    pub nodes_per_elem: usize,
    pub elements: Vec<Vec<usize>>,
    pub boundary: Vec<usize>,
}

impl From<&Mesh> for MeshFile {
    fn from(mesh: &Mesh) -> Self {
        let (flat, k) = mesh.elements();
        MeshFile {
            dim: mesh.dim(),
            coords: (0..mesh.num_nodes()).map(|i| mesh.coords_of(i)).collect(),
            nodes_per_elem: k,
            elements: flat.chunks_exact(k).map(<[usize]>::to_vec).collect(),
            boundary: mesh.boundary_nodes(),
        }
    }
}

impl MeshFile {
    /// Rebuilds the mesh and checks it against the stored boundary.
    pub fn into_mesh(self) -> Result<Mesh> {
        let mesh = match (self.dim, self.nodes_per_elem) {
            (1, 2) => {
                let n = self.coords.len();
                if n < 3 {
                    return Err(Error::Domain("1D mesh needs at least 3 nodes".into()));
                }
                let m = make_interval_mesh(self.coords[0][0], self.coords[n - 1][0], n - 2)?;
                if m.coords.iter().zip(&self.coords).any(|(a, b)| *a != b[0]) {
                    return Err(Error::Domain("1D mesh is not uniform".into()));
                }
                Mesh::Interval(m)
            }
            (2, 3) => {
                let nodes = self.coords.iter().map(|c| [c[0], c[1]]).collect();
                let elems = self.elements.iter().map(|e| [e[0], e[1], e[2]]).collect();
                Mesh::Triangles(TriMesh::from_parts(nodes, elems)?)
            }
            (d, k) => {
                return Err(Error::Domain(format!("unsupported mesh: dim {d} with {k} nodes per element")))
            }
        };
        if mesh.boundary_nodes() != self.boundary {
            return Err(Error::Domain("boundary section does not match the mesh".into()));
        }
        Ok(mesh)
    }
}

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    let file = MeshFile::from(mesh);
    writeln!(out, "nodes {} {}", file.coords.len(), file.dim)?;
    for c in &file.coords {
        let line: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    writeln!(out, "elements {} {}", file.elements.len(), file.nodes_per_elem)?;
    for e in &file.elements {
        let line: Vec<String> = e.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    writeln!(out, "boundary {}", file.boundary.len())?;
    for b in &file.boundary {
        writeln!(out, "{b}")?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        loop {
            self.line_no += 1;
            match self.inner.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        return Ok(line);
                    }
                }
                None => return Err(self.err("unexpected end of file")),
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line_no, msg: msg.into() }
    }

    fn header(&mut self, keyword: &str, fields: usize) -> Result<Vec<usize>> {
        let line = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(keyword) {
            return Err(self.err(format!("expected '{keyword}' header")));
        }
        let values = self.numbers::<usize>(parts)?;
        if values.len() != fields {
            return Err(self.err(format!("'{keyword}' header needs {fields} integers")));
        }
        Ok(values)
    }

    fn numbers<'a, T: std::str::FromStr>(&self, parts: impl Iterator<Item = &'a str>) -> Result<Vec<T>> {
        parts.map(|s| s.parse::<T>().map_err(|_| self.err(format!("cannot parse '{s}'")))).collect()
    }

    fn row<T: std::str::FromStr>(&mut self, len: usize) -> Result<Vec<T>> {
        let line = self.next_line()?;
        let row = self.numbers(line.split_whitespace())?;
        if row.len() != len {
            return Err(self.err(format!("expected {len} values, found {}", row.len())));
        }
        Ok(row)
    }
}

pub fn parse_mesh<R: BufRead>(input: R) -> Result<MeshFile> {
    let mut lines = Lines { inner: input.lines(), line_no: 0 };
    let [n, dim] = lines.header("nodes", 2)?[..] else { unreachable!() };
    let coords = (0..n).map(|_| lines.row::<f64>(dim)).collect::<Result<Vec<_>>>()?;
    let [t, k] = lines.header("elements", 2)?[..] else { unreachable!() };
    let elements = (0..t).map(|_| lines.row::<usize>(k)).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = elements.iter().flatten().find(|&&i| i >= n) {
        return Err(lines.err(format!("node index {bad} out of range")));
    }
    let [m] = lines.header("boundary", 1)?[..] else { unreachable!() };
    let boundary = (0..m).map(|_| lines.row::<usize>(1).map(|r| r[0])).collect::<Result<Vec<_>>>()?;
    Ok(MeshFile { dim, coords, nodes_per_elem: k, elements, boundary })
}

/// One `"<i> <j>"` line per structural nonzero.
pub fn write_sparsity<W: Write>(pattern: &SparsityPattern, mut out: W) -> Result<()> {
    for (i, j) in pattern.coordinate_list() {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

/// CSV with header `x,u` or `x,y,u`, one row per node in mesh order.
pub fn write_solution_csv<W: Write>(mesh: &Mesh, u_full: &[f64], mut out: W) -> Result<()> {
    if u_full.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch { expected: mesh.num_nodes(), got: u_full.len() });
    }
    writeln!(out, "{}", if mesh.dim() == 1 { "x,u" } else { "x,y,u" })?;
    for (i, u) in u_full.iter().enumerate() {
        let mut fields: Vec<String> = mesh.coords_of(i).iter().map(|c| c.to_string()).collect();
        fields.push(u.to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Whitespace- or newline-separated nodal values.
pub fn read_nodal_values<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (no, line) in input.lines().enumerate() {
        for tok in line?.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
            values.push(
                tok.parse()
                    .map_err(|_| Error::Parse { line: no + 1, msg: format!("cannot parse '{tok}'") })?,
            );
        }
    }
    Ok(values)
}
