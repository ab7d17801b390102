//! Nonlocal diffusion with a Gaussian kernel on unions of boxes.
//!
//! Tensor-product Lagrange elements, stiffness and load assembled from
//! closed-form separable integrals, a Jacobi-preconditioned CG solve and
//! nonlocal gradient recovery with a boundary correction.

pub mod assembly;
pub mod error;
pub mod experiment;
pub mod integrals;
pub mod mesh;
pub mod metrics;
pub mod oracle;
pub mod poly;
pub mod quadrature;
pub mod recovery;
pub mod sparse;
pub mod validation;

pub use error::{Error, Result};
pub use integrals::KernelParams;
pub use mesh::{build_mesh, BoxDomain, CartesianMesh, DofMap};
pub use poly::Poly1D;
pub use sparse::{cg_solve, SparseSymMatrix};
