//! Unconstrained minimizers for smooth objectives on `R^n`.
//!
//! Trust-region Newton with a finite-difference Hessian (sparse colored or
//! dense) and dense BFGS with a Wolfe line search.

mod bfgs;
mod hessian;
mod steihaug;
mod subspace;
mod trust_region;

use std::cell::Cell;
use std::time::{Duration, Instant};

pub use bfgs::bfgs_minimize;
pub use hessian::{hessian_colored_fd, hessian_dense_fd, hessian_step};
pub use steihaug::{tr_step, CgOptions, TrStep};
pub use subspace::subspace_step;
pub use trust_region::{trust_region_minimize, HessianApprox};

/// A function with a gradient. Implementations must be pure.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
}

impl<O: Objective + ?Sized> Objective for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (**self).gradient(x, grad)
    }
}

/// Wraps an objective and counts evaluations.
pub struct Counted<O> {
    inner: O,
    values: Cell<usize>,
    gradients: Cell<usize>,
}

impl<O: Objective> Counted<O> {
    pub fn new(inner: O) -> Self {
        Counted { inner, values: Cell::new(0), gradients: Cell::new(0) }
    }

    pub fn value_evals(&self) -> usize {
        self.values.get()
    }

    pub fn gradient_evals(&self) -> usize {
        self.gradients.get()
    }
}

impl<O: Objective> Objective for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.values.set(self.values.get() + 1);
        self.inner.value(x)
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        self.gradients.set(self.gradients.get() + 1);
        self.inner.gradient(x, grad)
    }
}

/// The four solver configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    /// Trust region, exact gradient, colored sparse FD Hessian.
    TrExactGradSparse,
    /// Trust region, central-difference gradient, colored sparse FD Hessian.
    TrFdGradSparse,
    /// Trust region, central-difference gradient, dense FD Hessian.
    TrFdGradDense,
    /// Dense BFGS on central-difference gradients.
    QuasiNewtonBfgs,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::TrExactGradSparse,
        SolverKind::TrFdGradSparse,
        SolverKind::TrFdGradDense,
        SolverKind::QuasiNewtonBfgs,
    ];

    pub fn option_number(self) -> usize {
        match self {
            SolverKind::TrExactGradSparse => 1,
            SolverKind::TrFdGradSparse => 2,
            SolverKind::TrFdGradDense => 3,
            SolverKind::QuasiNewtonBfgs => 4,
        }
    }

    pub fn uses_exact_gradient(self) -> bool {
        self == SolverKind::TrExactGradSparse
    }

    pub fn uses_pattern(self) -> bool {
        matches!(self, SolverKind::TrExactGradSparse | SolverKind::TrFdGradSparse)
    }

    /// Stores an `n × n` matrix.
    pub fn is_dense(self) -> bool {
        matches!(self, SolverKind::TrFdGradDense | SolverKind::QuasiNewtonBfgs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradTol,
    MaxIters,
    RadiusCollapse,
    LineSearchFail,
    TimeLimit,
}

impl Termination {
    pub fn converged(self) -> bool {
        self == Termination::GradTol
    }
}

/// Solver for the trust-region model problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subproblem {
    /// Truncated CG, stopped at the region boundary.
    Steihaug,
    /// Exact minimization over the span of the gradient and an untruncated
    /// CG direction.
    TwoDimSubspace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stop once the gradient's infinity norm is at most this.
    pub grad_tol: f64,
    /// `None` means `10 * dim + 100`.
    pub max_iters: Option<usize>,
    pub tr_radius0: f64,
    pub tr_radius_max: f64,
    pub eta_accept: f64,
    pub shrink_threshold: f64,
    pub expand_threshold: f64,
    pub shrink_factor: f64,
    pub expand_factor: f64,
    /// `None` means the forcing term `min(0.5, sqrt(|g|)) |g|`.
    pub cg_tol: Option<f64>,
    /// `None` means the problem dimension.
    pub cg_max_iters: Option<usize>,
    pub time_limit: Option<Duration>,
    pub subproblem: Subproblem,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            grad_tol: 1e-6,
            max_iters: None,
            tr_radius0: 1.0,
            tr_radius_max: 1e3,
            eta_accept: 0.1,
            shrink_threshold: 0.25,
            expand_threshold: 0.75,
            shrink_factor: 0.25,
            expand_factor: 2.0,
            cg_tol: None,
            cg_max_iters: None,
            time_limit: None,
            subproblem: Subproblem::TwoDimSubspace,
        }
    }
}

impl SolverOptions {
    pub fn max_iters_for(&self, dim: usize) -> usize {
        self.max_iters.unwrap_or(10 * dim + 100)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.grad_tol.is_nan() || self.grad_tol < 0.0 {
            return Err(format!("grad_tol must be >= 0, got {}", self.grad_tol));
        }
        if !(0.0 < self.eta_accept
            && self.eta_accept < self.shrink_threshold
            && self.shrink_threshold < self.expand_threshold
            && self.expand_threshold < 1.0)
        {
            return Err("need 0 < eta_accept < shrink_threshold < expand_threshold < 1".into());
        }
        if !(self.tr_radius0 > 0.0 && self.tr_radius_max >= self.tr_radius0) {
            return Err("need 0 < tr_radius0 <= tr_radius_max".into());
        }
        if !(0.0 < self.shrink_factor && self.shrink_factor < 1.0 && self.expand_factor > 1.0) {
            return Err("need 0 < shrink_factor < 1 < expand_factor".into());
        }
        Ok(())
    }
}

/// Outcome of a minimization in the solver's own variables.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm_inf: f64,
    /// Trust-region subproblems solved (rejected steps included), or BFGS
    /// line searches.
    pub iterations: usize,
    pub energy_evals: usize,
    pub gradient_evals: usize,
    pub wall_time: Duration,
    pub termination: Termination,
    /// Objective value at every accepted iterate, starting with `x0`.
    pub accepted_values: Vec<f64>,
}

pub(crate) struct Deadline(Option<Instant>);

impl Deadline {
    pub(crate) fn new(start: Instant, limit: Option<Duration>) -> Self {
        Deadline(limit.map(|d| start + d))
    }

    pub(crate) fn passed(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}
