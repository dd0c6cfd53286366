//! Discontinuous least-squares finite elements for the indefinite
//! time-harmonic Maxwell equations
//!
//! ```text
//! curl curl u - k^2 u = f  in the domain,   n x u = g  on the boundary,
//! ```
//!
//! written as the first-order system `curl p - k u = f/k`, `curl u - k p = 0`
//! and discretized with piecewise polynomials of degree `m` on simplicial
//! meshes in two and three dimensions.
//!
//! ```
//! use dls_maxwell::{convergence_study, ManufacturedProblem, StudyOptions};
//!
//! let problem = ManufacturedProblem::example1(1.0).unwrap();
//! let record = convergence_study(&problem, &[2, 4], &StudyOptions::default()).unwrap();
//! assert!(record.levels[1].energy_error < record.levels[0].energy_error);
//! ```

pub mod adapt;
pub mod analysis;
pub mod assembly;
pub mod error;
pub mod femspace;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod study;

pub use adapt::{adaptive_solve, dorfler_mark, AdaptiveFailure, AdaptiveHistory, AdaptiveRecord};
pub use analysis::{convergence_orders, ConvergenceRecord, ErrorReport};
pub use assembly::{assemble, LsqForm, QuadratureSet, SparseSystem};
pub use error::{Error, Result};
pub use femspace::{DgSpace, DofMap, FieldPair};
pub use mesh::{build_faces, l_shaped_mesh, unit_cube_mesh, unit_square_mesh, FaceSet, Point, SimplicialMesh};
pub use problems::{ManufacturedProblem, MaxwellProblem, ProblemKind};
pub use solver::{CsrMatrix, SolveStats, SolverKind, SolverOptions};
pub use study::{convergence_study, default_mesh, solve_on_mesh, StudyOptions};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    mod spaces {}
    #[doc = include_str!("../../../book/src/functional.md")]
    mod functional {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../book/src/adaptivity.md")]
    mod adaptivity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
