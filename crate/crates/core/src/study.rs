//! End-to-end drivers: mesh, assemble, solve, measure.

use crate::analysis::{error_report, indicators, ConvergenceRecord, ErrorReport};
use crate::assembly::{assemble, LsqForm, QuadratureSet, SparseSystem};
use crate::error::{Error, Result};
use crate::femspace::{DgSpace, FieldPair};
use crate::mesh::{build_faces, l_shaped_mesh, unit_cube_mesh, unit_square_mesh, SimplicialMesh};
use crate::problems::{ManufacturedProblem, MaxwellProblem, ProblemKind};
use crate::solver::{solve, SolveStats, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    /// Polynomial degree `m`.
    pub degree: usize,
    /// Penalty scaling of the face terms.
    pub mu: f64,
    pub solver: SolverOptions,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            degree: 1,
            mu: 1.0,
            solver: SolverOptions::default(),
        }
    }
}

/// The structured mesh with `n` subdivisions per unit length on the
/// problem's domain.
pub fn default_mesh(problem: &ManufacturedProblem, n: usize) -> SimplicialMesh {
    match problem.kind {
        ProblemKind::Smooth2d => unit_square_mesh(n),
        ProblemKind::LShape { .. } => l_shaped_mesh(n),
        ProblemKind::Smooth3d | ProblemKind::Singular3d { .. } => unit_cube_mesh(n),
    }
}

/// Discrete solution on one mesh together with its errors.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub field: FieldPair,
    pub report: ErrorReport,
    pub stats: SolveStats,
    /// Squared local indicators, when requested.
    pub indicators: Option<Vec<f64>>,
}

/// Assembles the system without solving it.
pub fn assemble_on_mesh(problem: &dyn MaxwellProblem, mesh: &SimplicialMesh, opts: &StudyOptions) -> Result<SparseSystem> {
    let faces = build_faces(mesh)?;
    let space = DgSpace::new(mesh, &faces, opts.degree)?;
    let form = LsqForm::for_problem(problem, opts.mu)?;
    assemble(&space, problem, &form, &QuadratureSet::for_assembly(mesh.dim(), opts.degree)?)
}

/// Assembles, solves and measures the errors on `mesh`. Fails with
/// [`Error::SolverFailed`] when the iteration does not reach the tolerance.
pub fn solve_on_mesh(
    problem: &dyn MaxwellProblem,
    mesh: &SimplicialMesh,
    opts: &StudyOptions,
    with_indicators: bool,
) -> Result<LevelSolution> {
    if problem.dim() != mesh.dim() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dim(),
            found: problem.dim(),
        });
    }
    let faces = build_faces(mesh)?;
    let space = DgSpace::new(mesh, &faces, opts.degree)?;
    let form = LsqForm::for_problem(problem, opts.mu)?;
    let system = assemble(&space, problem, &form, &QuadratureSet::for_assembly(mesh.dim(), opts.degree)?)?;
    let (x, stats) = solve(&system.matrix, &system.rhs, &opts.solver)?;
    drop(system);
    if !stats.converged {
        return Err(Error::SolverFailed(format!(
            "{} stopped after {} iterations at relative residual {:.3e}{}",
            opts.solver.kind,
            stats.iterations,
            stats.relative_residual,
            if stats.breakdown { " (breakdown)" } else { "" }
        )));
    }
    let field = FieldPair::from_coeffs(space.dofmap, x)?;
    let quad = QuadratureSet::for_errors(mesh.dim(), opts.degree)?;
    let report = error_report(&space, problem, &form, &field, &quad, stats.iterations)?;
    let indicators = if with_indicators {
        Some(indicators(&space, problem, &field, &quad)?)
    } else {
        None
    };
    Ok(LevelSolution {
        field,
        report,
        stats,
        indicators,
    })
}

/// Solves on the structured meshes with the given subdivision counts.
pub fn convergence_study(problem: &ManufacturedProblem, levels: &[usize], opts: &StudyOptions) -> Result<ConvergenceRecord> {
    let mut out = Vec::with_capacity(levels.len());
    for &n in levels {
        if n == 0 {
            return Err(Error::InvalidParameter("mesh level must be positive".into()));
        }
        let mesh = default_mesh(problem, n);
        let mut report = solve_on_mesh(problem, &mesh, opts, false)?.report;
        report.h_nominal = Some(1.0 / n as f64);
        out.push(report);
    }
    Ok(ConvergenceRecord { levels: out })
}
