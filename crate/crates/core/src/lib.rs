//! Finite-element energy minimization for the discrete p-Laplacian.
//!
//! Piecewise-linear elements on uniform interval meshes and structured
//! triangulations, an element-wise vectorized energy with exact and
//! patch-local finite-difference gradients, and trust-region / BFGS
//! minimizers that exploit the mesh-derived Hessian sparsity.

pub mod assembly;
pub mod energy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod optimizer;
pub mod problem;

pub use error::{Error, Result};
pub use mesh::{DomainKind, Mesh, Mesh1D, TriMesh};
pub use optimizer::{SolverKind, SolverOptions, Termination};
pub use problem::{PLaplace, SolveReport};
