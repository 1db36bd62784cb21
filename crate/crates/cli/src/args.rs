use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use plap_core::energy::ProblemSpec;
use plap_core::io::read_nodal_values;
use plap_core::mesh::{make_interval_mesh, make_structured_trimesh};
use plap_core::{DomainKind, Mesh, SolverKind, SolverOptions};

#[derive(Debug, Parser)]
#[command(name = "plap", version, about = "Minimize the discrete p-Laplace energy on P1 finite elements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and write the nodal solution as CSV.
    Solve(SolveArgs),
    /// Time the solver options over a list of mesh sizes.
    Bench(BenchArgs),
    /// Write a mesh file and optionally its Hessian sparsity pattern.
    Mesh(MeshArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    /// (-1, 1)
    Interval,
    /// [0, 1]^2
    Square,
    /// [-1, 1]^2 without the quadrant x > 0, y < 0
    Lshape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    /// Option 1: trust region, exact gradient, colored sparse Hessian.
    TrExact,
    /// Option 2: trust region, finite-difference gradient, colored sparse Hessian.
    TrFd,
    /// Option 3: trust region, finite-difference gradient, dense Hessian.
    TrDense,
    /// Option 4: BFGS with finite-difference gradient.
    Qn,
    /// All four options in order.
    All,
}

impl SolverArg {
    pub fn kinds(self) -> Vec<SolverKind> {
        match self {
            SolverArg::TrExact => vec![SolverKind::TrExactGradSparse],
            SolverArg::TrFd => vec![SolverKind::TrFdGradSparse],
            SolverArg::TrDense => vec![SolverKind::TrFdGradDense],
            SolverArg::Qn => vec![SolverKind::QuasiNewtonBfgs],
            SolverArg::All => SolverKind::ALL.to_vec(),
        }
    }
}

pub fn solver_name(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::TrExactGradSparse => "tr-exact",
        SolverKind::TrFdGradSparse => "tr-fd",
        SolverKind::TrFdGradDense => "tr-dense",
        SolverKind::QuasiNewtonBfgs => "qn",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Md,
}

/// Domain selection shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct DomainArgs {
    /// Spatial dimension; inferred from --domain when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: Option<u8>,
    /// Domain; defaults to interval in 1D and lshape in 2D.
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
}

impl DomainArgs {
    pub fn resolve(&self) -> Result<DomainArg> {
        match (self.dim, self.domain) {
            (None | Some(1), None) => Ok(DomainArg::Interval),
            (Some(2), None) => Ok(DomainArg::Lshape),
            (None | Some(1), Some(DomainArg::Interval)) => Ok(DomainArg::Interval),
            (None | Some(2), Some(d @ (DomainArg::Square | DomainArg::Lshape))) => Ok(d),
            (Some(dim), Some(d)) => bail!("domain {d:?} is not {dim}-dimensional"),
            (Some(dim), None) => bail!("unsupported dimension {dim}"),
        }
    }
}

/// Problem data shared by `solve` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Power of the energy density, > 1.
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    /// Constant load.
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub f: f64,
    /// Constant Dirichlet value on the whole boundary.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub g: f64,
    /// Nodal load values (whitespace or comma separated, mesh node order);
    /// overrides --f.
    #[arg(long)]
    pub f_file: Option<PathBuf>,
}

impl ProblemArgs {
    pub fn spec(&self, mesh: &Mesh) -> Result<ProblemSpec> {
        ensure!(self.p > 1.0 && self.p.is_finite(), "--p must be a finite number > 1, got {}", self.p);
        let mut spec = ProblemSpec::constant(mesh, self.p, self.f, self.g);
        if let Some(path) = &self.f_file {
            let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let values = read_nodal_values(std::io::BufReader::new(file))
                .with_context(|| format!("reading {}", path.display()))?;
            ensure!(
                values.len() == mesh.num_nodes(),
                "{} holds {} values but the mesh has {} nodes",
                path.display(),
                values.len(),
                mesh.num_nodes()
            );
            spec.f_nodal = values;
        }
        Ok(spec)
    }
}

/// Stopping rules shared by `solve` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::TrExact)]
    pub solver: SolverArg,
    /// Stop when the gradient's infinity norm is at most this.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Iteration cap; defaults to 10 * (number of unknowns) + 100.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Wall-clock budget per solve, in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub time_budget: f64,
    /// Recorded in outputs; no solver path is randomized.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn options(&self) -> Result<SolverOptions> {
        ensure!(self.tol >= 0.0 && self.tol.is_finite(), "--tol must be finite and >= 0");
        ensure!(
            self.time_budget > 0.0 && self.time_budget.is_finite(),
            "--time-budget must be a positive number of seconds"
        );
        Ok(SolverOptions {
            grad_tol: self.tol,
            max_iters: self.max_iters,
            time_limit: Some(std::time::Duration::from_secs_f64(self.time_budget)),
            ..Default::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Interior nodes of the 1D mesh.
    #[arg(long, default_value_t = 999)]
    pub n: usize,
    /// Refinement level of the 2D mesh.
    #[arg(long, default_value_t = 2)]
    pub level: u32,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Solution CSV; with --solver all, one file per option with an `_opt<k>` suffix.
    #[arg(long, default_value = "solution.csv")]
    pub out: PathBuf,
    /// Also write the mesh to this file.
    #[arg(long)]
    pub mesh_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Comma-separated interior node counts (1D), ascending.
    #[arg(long, value_delimiter = ',', default_value = "9,99,999")]
    pub n: Vec<usize>,
    /// Comma-separated refinement levels (2D), ascending.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub level: Vec<u32>,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: BenchSolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
    /// Report file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Like [`SolverArgs`] but running every option unless told otherwise.
#[derive(Debug, Args)]
pub struct BenchSolverArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::All)]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Wall-clock budget per cell, in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub time_budget: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl BenchSolverArgs {
    pub fn as_solver_args(&self) -> SolverArgs {
        SolverArgs {
            solver: self.solver,
            tol: self.tol,
            max_iters: self.max_iters,
            time_budget: self.time_budget,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 999)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub level: u32,
    /// Mesh file.
    #[arg(long, default_value = "mesh.txt")]
    pub out: PathBuf,
    /// Also dump the Hessian sparsity pattern next to the mesh (`.sparsity`).
    #[arg(long)]
    pub sparsity: bool,
}

/// The mesh for a domain at the given 1D size or 2D level.
pub fn build_mesh(domain: DomainArg, n: usize, level: u32) -> Result<Mesh> {
    Ok(match domain {
        DomainArg::Interval => Mesh::Interval(make_interval_mesh(-1.0, 1.0, n)?),
        DomainArg::Square => Mesh::Triangles(make_structured_trimesh(DomainKind::UnitSquare, level)?),
        DomainArg::Lshape => Mesh::Triangles(make_structured_trimesh(DomainKind::LShape, level)?),
    })
}
