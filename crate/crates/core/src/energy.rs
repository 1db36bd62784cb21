//! Discrete p-Laplace energy
//!
//! ```text
//! J(v) = (1/p) Σ_i |T_i| Σ_d |∂_d v|_{T_i}|^p  -  Σ_k b_k v_k
//! ```
//!
//! evaluated element-wise over the flat layout in [`ElementData`]. Intervals
//! are treated as one-directional elements with two nodes, so the same
//! kernels serve both dimensions.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::linalg::check_len;
use crate::mesh::{complement, Mesh, Mesh1D, NodeToElems, TriMesh};

/// Topology and basis-function derivatives, fixed for the lifetime of a problem.
#[derive(Debug, Clone)]
pub struct ElementData {
    pub num_nodes: usize,
    pub nodes_per_elem: usize,
    /// `|T| × nodes_per_elem`, row-major.
    pub elems2nodes: Vec<usize>,
    pub areas: Vec<f64>,
    /// One `|T| × nodes_per_elem` table per space direction.
    pub dphi: Vec<Vec<f64>>,
    pub node2elems: NodeToElems,
}

impl ElementData {
    pub fn num_elements(&self) -> usize {
        self.areas.len()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.nodes_per_elem;
        &self.elems2nodes[e * k..(e + 1) * k]
    }
}

impl From<&Mesh1D> for ElementData {
    fn from(mesh: &Mesh1D) -> Self {
        let t = mesh.num_elements();
        let elems2nodes: Vec<usize> = (0..t).flat_map(|e| [e, e + 1]).collect();
        let inv = 1.0 / mesh.h;
        ElementData {
            num_nodes: mesh.num_nodes(),
            nodes_per_elem: 2,
            node2elems: NodeToElems::build(mesh.num_nodes(), &elems2nodes, 2),
            elems2nodes,
            areas: vec![mesh.h; t],
            dphi: vec![(0..t).flat_map(|_| [-inv, inv]).collect()],
        }
    }
}

impl From<&TriMesh> for ElementData {
    fn from(mesh: &TriMesh) -> Self {
        ElementData {
            num_nodes: mesh.num_nodes(),
            nodes_per_elem: 3,
            elems2nodes: mesh.elems2nodes.iter().flatten().copied().collect(),
            areas: mesh.areas.clone(),
            dphi: vec![
                mesh.dphi_x.iter().flatten().copied().collect(),
                mesh.dphi_y.iter().flatten().copied().collect(),
            ],
            node2elems: mesh.node2elems.clone(),
        }
    }
}

impl From<&Mesh> for ElementData {
    fn from(mesh: &Mesh) -> Self {
        match mesh {
            Mesh::Interval(m) => m.into(),
            Mesh::Triangles(m) => m.into(),
        }
    }
}

/// Integrand `|t|^p` and its flux `s(t) = |t|^(p-2) t`, optionally smoothed
/// to `(t² + ε²)^(p/2) - ε^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub p: f64,
    pub reg_eps: f64,
}

impl PowerLaw {
    pub fn new(p: f64, reg_eps: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Problem(format!("power must satisfy p > 1, got {p}")));
        }
        if !(reg_eps >= 0.0 && reg_eps.is_finite()) {
            return Err(Error::Problem(format!("regularization must be >= 0, got {reg_eps}")));
        }
        Ok(PowerLaw { p, reg_eps })
    }

    #[inline]
    pub fn density(&self, t: f64) -> f64 {
        if self.reg_eps == 0.0 {
            t.abs().powf(self.p)
        } else {
            let e2 = self.reg_eps * self.reg_eps;
            (t * t + e2).powf(0.5 * self.p) - self.reg_eps.powf(self.p)
        }
    }

    /// Derivative of `density / p`. Zero at `t = 0` for every `p > 1`.
    #[inline]
    pub fn flux(&self, t: f64) -> f64 {
        if self.reg_eps == 0.0 {
            if t == 0.0 {
                0.0
            } else {
                t.signum() * t.abs().powf(self.p - 1.0)
            }
        } else {
            t * (t * t + self.reg_eps * self.reg_eps).powf(0.5 * (self.p - 2.0))
        }
    }
}

/// Per-evaluation scratch: nodal values gathered per element and the
/// element-wise constant partial derivatives.
#[derive(Debug, Clone, Default)]
pub struct EvalWorkspace {
    pub v_elems: Vec<f64>,
    /// `v_d_elems[d][i]` is the derivative of `v` in direction `d` on element `i`.
    pub v_d_elems: Vec<Vec<f64>>,
}

impl EvalWorkspace {
    pub fn new(data: &ElementData) -> Self {
        EvalWorkspace {
            v_elems: vec![0.0; data.elems2nodes.len()],
            v_d_elems: vec![vec![0.0; data.num_elements()]; data.dphi.len()],
        }
    }

    pub fn refresh(&mut self, data: &ElementData, v_full: &[f64]) {
        for (ve, &n) in self.v_elems.iter_mut().zip(&data.elems2nodes) {
            *ve = v_full[n];
        }
        let k = data.nodes_per_elem;
        for (dphi, out) in data.dphi.iter().zip(self.v_d_elems.iter_mut()) {
            for (i, o) in out.iter_mut().enumerate() {
                *o = dphi[i * k..(i + 1) * k]
                    .iter()
                    .zip(&self.v_elems[i * k..(i + 1) * k])
                    .map(|(a, b)| a * b)
                    .sum();
            }
        }
    }
}

/// The discrete energy on one mesh: element data, power law and linear term.
#[derive(Debug)]
pub struct Energy {
    pub data: ElementData,
    pub law: PowerLaw,
    pub b: Vec<f64>,
    kernel_evals: AtomicU64,
}

impl Clone for Energy {
    fn clone(&self) -> Self {
        Energy { data: self.data.clone(), law: self.law, b: self.b.clone(), kernel_evals: AtomicU64::new(0) }
    }
}

impl Energy {
    pub fn new(data: ElementData, law: PowerLaw, b: Vec<f64>) -> Result<Self> {
        check_len(data.num_nodes, b.len())?;
        Ok(Energy { data, law, b, kernel_evals: AtomicU64::new(0) })
    }

    /// Number of element-kernel invocations so far.
    pub fn kernel_evals(&self) -> u64 {
        self.kernel_evals.load(Ordering::Relaxed)
    }

    pub fn reset_kernel_evals(&self) {
        self.kernel_evals.store(0, Ordering::Relaxed);
    }

    /// Energy through a refreshed workspace, summed in element order.
    pub fn value_with(&self, ws: &mut EvalWorkspace, v_full: &[f64]) -> f64 {
        ws.refresh(&self.data, v_full);
        let p = self.law.p;
        let mut total = 0.0;
        for (i, area) in self.data.areas.iter().enumerate() {
            let integrand: f64 = ws.v_d_elems.iter().map(|vd| self.law.density(vd[i])).sum();
            total += area * (integrand / p);
        }
        self.kernel_evals.fetch_add(self.data.num_elements() as u64, Ordering::Relaxed);
        total - crate::linalg::dot(&self.b, v_full)
    }

    pub fn value(&self, v_full: &[f64]) -> f64 {
        self.value_with(&mut EvalWorkspace::new(&self.data), v_full)
    }

    /// Nonlinear contribution of a single element, read straight from `v_full`.
    #[inline]
    pub fn element_energy(&self, e: usize, v_full: &[f64]) -> f64 {
        let k = self.data.nodes_per_elem;
        let nodes = self.data.element(e);
        let integrand: f64 = self
            .data
            .dphi
            .iter()
            .map(|dphi| {
                let vd: f64 = dphi[e * k..(e + 1) * k].iter().zip(nodes).map(|(a, &n)| a * v_full[n]).sum();
                self.law.density(vd)
            })
            .sum();
        self.data.areas[e] * (integrand / self.law.p)
    }

    /// Energy terms that depend on `v_full[node]`: the element patch plus `b_node v_node`.
    pub fn patch_energy(&self, node: usize, v_full: &[f64]) -> f64 {
        let patch = self.data.node2elems.patch(node);
        self.kernel_evals.fetch_add(patch.len() as u64, Ordering::Relaxed);
        let mut total = 0.0;
        for &e in patch {
            total += self.element_energy(e, v_full);
        }
        total - self.b[node] * v_full[node]
    }

    /// Exact gradient on all nodes, scattered element by element.
    pub fn gradient(&self, v_full: &[f64], grad: &mut [f64]) {
        let k = self.data.nodes_per_elem;
        grad.iter_mut().zip(&self.b).for_each(|(g, b)| *g = -b);
        for e in 0..self.data.num_elements() {
            let nodes = self.data.element(e);
            for dphi in &self.data.dphi {
                let local = &dphi[e * k..(e + 1) * k];
                let vd: f64 = local.iter().zip(nodes).map(|(a, &n)| a * v_full[n]).sum();
                let w = self.data.areas[e] * self.law.flux(vd);
                if w != 0.0 {
                    for (a, &n) in local.iter().zip(nodes) {
                        grad[n] += w * a;
                    }
                }
            }
        }
    }
}

/// An energy whose dependence on each coefficient is confined to a local patch.
pub trait PatchEnergy {
    /// All terms of the energy that involve `v_full[node]`.
    fn patch_energy(&self, node: usize, v_full: &[f64]) -> f64;
}

impl PatchEnergy for Energy {
    fn patch_energy(&self, node: usize, v_full: &[f64]) -> f64 {
        Energy::patch_energy(self, node, v_full)
    }
}

/// Central-difference step for coefficient value `v`.
#[inline]
pub fn central_step(v: f64) -> f64 {
    f64::EPSILON.cbrt() * v.abs().max(1.0)
}

/// Central-difference gradient on the listed indices.
///
/// Each component perturbs one coefficient and re-evaluates only that
/// coefficient's patch, which differs from the full energy by terms that do
/// not depend on it. `v_full` is restored before returning.
pub fn grad_fd<E: PatchEnergy + ?Sized>(energy: &E, v_full: &mut [f64], indices: &[usize], out: &mut [f64]) {
    for (o, &k) in out.iter_mut().zip(indices) {
        let orig = v_full[k];
        let delta = central_step(orig);
        let plus = orig + delta;
        let minus = orig - delta;
        v_full[k] = plus;
        let e_plus = energy.patch_energy(k, v_full);
        v_full[k] = minus;
        let e_minus = energy.patch_energy(k, v_full);
        v_full[k] = orig;
        *o = (e_plus - e_minus) / (plus - minus);
    }
}

/// Problem data that does not depend on the mesh resolution beyond nodal arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub p: f64,
    /// Nodal values of the load `f`.
    pub f_nodal: Vec<f64>,
    /// Prescribed Dirichlet values, keyed by node.
    pub g: BTreeMap<usize, f64>,
    pub reg_eps: f64,
}

impl ProblemSpec {
    /// Constant load `f` and constant Dirichlet value `g` on every boundary node.
    pub fn constant(mesh: &Mesh, p: f64, f: f64, g: f64) -> Self {
        ProblemSpec {
            p,
            f_nodal: vec![f; mesh.num_nodes()],
            g: mesh.boundary_nodes().into_iter().map(|n| (n, g)).collect(),
            reg_eps: 0.0,
        }
    }
}

/// Split of node indices into free (interior) and fixed (Dirichlet) sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub free: Vec<usize>,
    pub fixed: Vec<usize>,
    pub fixed_values: Vec<f64>,
}

impl DofMap {
    pub fn num_nodes(&self) -> usize {
        self.free.len() + self.fixed.len()
    }

    pub fn restrict(&self, v_full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| v_full[i]).collect()
    }

    /// Writes free coefficients and Dirichlet values into `v_full`.
    pub fn embed_into(&self, x: &[f64], v_full: &mut [f64]) {
        for (&i, &xi) in self.free.iter().zip(x) {
            v_full[i] = xi;
        }
        for (&i, &gi) in self.fixed.iter().zip(&self.fixed_values) {
            v_full[i] = gi;
        }
    }

    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.num_nodes()];
        self.embed_into(x, &mut v);
        v
    }
}

/// Dirichlet split and the initial coefficient vector (zero on free nodes,
/// `g` on fixed ones).
pub fn apply_dirichlet(spec: &ProblemSpec, mesh: &Mesh) -> Result<(DofMap, Vec<f64>)> {
    let fixed = mesh.boundary_nodes();
    let fixed_values = fixed
        .iter()
        .map(|n| spec.g.get(n).copied().ok_or(Error::MissingBoundaryValue(*n)))
        .collect::<Result<Vec<f64>>>()?;
    let free = complement(mesh.num_nodes(), &fixed);
    let dofs = DofMap { free, fixed, fixed_values };
    let v0 = dofs.embed(&vec![0.0; dofs.free.len()]);
    Ok((dofs, v0))
}

fn energy_for(data: ElementData, spec: &ProblemSpec, b: &[f64]) -> Result<Energy> {
    Energy::new(data, PowerLaw::new(spec.p, spec.reg_eps)?, b.to_vec())
}

pub fn energy_1d(mesh: &Mesh1D, spec: &ProblemSpec, b: &[f64], v_full: &[f64]) -> Result<f64> {
    check_len(mesh.num_nodes(), v_full.len())?;
    Ok(energy_for(mesh.into(), spec, b)?.value(v_full))
}

pub fn energy_2d(mesh: &TriMesh, spec: &ProblemSpec, b: &[f64], v_full: &[f64]) -> Result<f64> {
    check_len(mesh.num_nodes(), v_full.len())?;
    Ok(energy_for(mesh.into(), spec, b)?.value(v_full))
}

pub fn grad_exact_1d(mesh: &Mesh1D, spec: &ProblemSpec, b: &[f64], v_full: &[f64]) -> Result<Vec<f64>> {
    check_len(mesh.num_nodes(), v_full.len())?;
    let mut g = vec![0.0; v_full.len()];
    energy_for(mesh.into(), spec, b)?.gradient(v_full, &mut g);
    Ok(g)
}

pub fn grad_exact_2d(mesh: &TriMesh, spec: &ProblemSpec, b: &[f64], v_full: &[f64]) -> Result<Vec<f64>> {
    check_len(mesh.num_nodes(), v_full.len())?;
    let mut g = vec![0.0; v_full.len()];
    energy_for(mesh.into(), spec, b)?.gradient(v_full, &mut g);
    Ok(g)
}

/// Closed-form minimizer of the continuous 1D problem with constant load `c`
/// and zero boundary values on a symmetric interval `(-L, L)`.
///
/// The flux satisfies `s(u') = -c x`, giving
/// `u(x) = -sgn(c) |c|^r (|x|^(r+1) - L^(r+1)) / (r+1)` with `r = 1/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSolution1D {
    pub p: f64,
    pub c: f64,
    pub half_width: f64,
    pub energy: f64,
}

impl ReferenceSolution1D {
    fn r(&self) -> f64 {
        1.0 / (self.p - 1.0)
    }

    pub fn u(&self, x: f64) -> f64 {
        let r = self.r();
        -self.c.signum() * self.c.abs().powf(r) * (x.abs().powf(r + 1.0) - self.half_width.powf(r + 1.0))
            / (r + 1.0)
    }

    pub fn du(&self, x: f64) -> f64 {
        let r = self.r();
        -self.c.signum() * self.c.abs().powf(r) * x.signum() * x.abs().powf(r)
    }
}

pub fn reference_solution_1d(p: f64, c: f64, a: f64, b: f64) -> Result<ReferenceSolution1D> {
    PowerLaw::new(p, 0.0)?;
    if a.is_nan() || b.is_nan() || a >= b || (a + b).abs() > 1e-14 * b.abs().max(1.0) {
        return Err(Error::Domain(format!("closed form needs a symmetric interval (-L, L), got ({a}, {b})")));
    }
    let half_width = b;
    let r = 1.0 / (p - 1.0);
    let energy = 2.0 * c.abs().powf(r + 1.0) * half_width.powf(r + 2.0) / (r + 2.0) * (1.0 / p - 1.0);
    Ok(ReferenceSolution1D { p, c, half_width, energy })
}
