//! A discretized p-Laplace problem reduced to its free coefficients, and the
//! dispatch onto the four solver configurations.

use std::cell::RefCell;
use std::time::Duration;

use crate::assembly::{hessian_sparsity, load_vector, mass_matrix};
use crate::energy::{
    apply_dirichlet, grad_fd, DofMap, ElementData, Energy, EvalWorkspace, PowerLaw, ProblemSpec,
};
use crate::error::{Error, Result};
use crate::linalg::{color_columns, SparsityPattern};
use crate::mesh::Mesh;
use crate::optimizer::{
    bfgs_minimize, trust_region_minimize, HessianApprox, Objective, OptimResult, SolverKind, SolverOptions,
    Termination,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    Exact,
    /// Patch-local central differences.
    CentralDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub kind: SolverKind,
    pub u_full: Vec<f64>,
    pub j_final: f64,
    pub grad_norm_inf: f64,
    pub iterations: usize,
    pub energy_evals: usize,
    pub gradient_evals: usize,
    pub wall_time: Duration,
    pub termination: Termination,
    pub accepted_values: Vec<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination.converged()
    }
}

/// Mesh, energy and Dirichlet split of one discrete problem.
#[derive(Debug)]
pub struct PLaplace {
    pub mesh: Mesh,
    pub energy: Energy,
    pub dofs: DofMap,
    /// Initial coefficients: `g` on fixed nodes, zero elsewhere.
    pub v0: Vec<f64>,
    pattern: SparsityPattern,
}

impl PLaplace {
    pub fn new(mesh: Mesh, spec: &ProblemSpec) -> Result<Self> {
        let law = PowerLaw::new(spec.p, spec.reg_eps)?;
        let mass = mass_matrix(&mesh);
        let b = load_vector(&mass, &spec.f_nodal)?;
        let (dofs, v0) = apply_dirichlet(spec, &mesh)?;
        if dofs.free.is_empty() {
            return Err(Error::Problem("mesh has no interior nodes".into()));
        }
        let energy = Energy::new(ElementData::from(&mesh), law, b)?;
        let pattern = color_columns(&hessian_sparsity(&mesh).restrict(&dofs.free));
        Ok(PLaplace { mesh, energy, dofs, v0, pattern })
    }

    /// Constant load and boundary values.
    pub fn with_constants(mesh: Mesh, p: f64, f: f64, g: f64) -> Result<Self> {
        let spec = ProblemSpec::constant(&mesh, p, f, g);
        Self::new(mesh, &spec)
    }

    pub fn num_free(&self) -> usize {
        self.dofs.free.len()
    }

    /// Hessian pattern on the free coefficients, colored.
    pub fn reduced_pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn objective(&self, mode: GradientMode) -> ReducedObjective<'_> {
        ReducedObjective {
            problem: self,
            mode,
            v_full: RefCell::new(self.v0.clone()),
            grad_full: RefCell::new(vec![0.0; self.v0.len()]),
            ws: RefCell::new(EvalWorkspace::new(&self.energy.data)),
        }
    }

    pub fn x0(&self) -> Vec<f64> {
        self.dofs.restrict(&self.v0)
    }

    pub fn solve(&self, kind: SolverKind, opts: &SolverOptions) -> Result<SolveReport> {
        opts.validate().map_err(Error::Problem)?;
        let mode =
            if kind.uses_exact_gradient() { GradientMode::Exact } else { GradientMode::CentralDifference };
        let obj = self.objective(mode);
        let x0 = self.x0();
        let r = match kind {
            SolverKind::TrExactGradSparse | SolverKind::TrFdGradSparse => {
                trust_region_minimize(&obj, &x0, HessianApprox::Sparse(&self.pattern), opts)
            }
            SolverKind::TrFdGradDense => trust_region_minimize(&obj, &x0, HessianApprox::Dense, opts),
            SolverKind::QuasiNewtonBfgs => bfgs_minimize(&obj, &x0, opts),
        };
        Ok(self.report(kind, r))
    }

    fn report(&self, kind: SolverKind, r: OptimResult) -> SolveReport {
        SolveReport {
            kind,
            u_full: self.dofs.embed(&r.x),
            j_final: r.value,
            grad_norm_inf: r.grad_norm_inf,
            iterations: r.iterations,
            energy_evals: r.energy_evals,
            gradient_evals: r.gradient_evals,
            wall_time: r.wall_time,
            termination: r.termination,
            accepted_values: r.accepted_values,
        }
    }
}

/// The energy as a function of the free coefficients only.
pub struct ReducedObjective<'a> {
    problem: &'a PLaplace,
    mode: GradientMode,
    v_full: RefCell<Vec<f64>>,
    grad_full: RefCell<Vec<f64>>,
    ws: RefCell<EvalWorkspace>,
}

impl Objective for ReducedObjective<'_> {
    fn dim(&self) -> usize {
        self.problem.dofs.free.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.v_full.borrow_mut();
        self.problem.dofs.embed_into(x, &mut v);
        self.problem.energy.value_with(&mut self.ws.borrow_mut(), &v)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let dofs = &self.problem.dofs;
        let mut v = self.v_full.borrow_mut();
        dofs.embed_into(x, &mut v);
        match self.mode {
            GradientMode::Exact => {
                let mut full = self.grad_full.borrow_mut();
                self.problem.energy.gradient(&v, &mut full);
                for (gi, &k) in grad.iter_mut().zip(&dofs.free) {
                    *gi = full[k];
                }
            }
            GradientMode::CentralDifference => grad_fd(&self.problem.energy, &mut v, &dofs.free, grad),
        }
    }
}
