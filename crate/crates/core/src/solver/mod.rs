//! Sparse linear algebra for the assembled least-squares systems.
//!
//! The systems are symmetric positive definite, so both BiCGstab and CG
//! apply. Iterations always start from `x0 = 0` and all reductions are
//! sequential, which makes solves bitwise reproducible.

mod csr;
mod krylov;
mod precond;

pub use csr::CsrMatrix;
pub use krylov::{bicgstab, cg, cg_sgs, SolveStats};
pub use precond::{Identity, Ilu0, Jacobi, Preconditioner, SymmetricGaussSeidel};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    BiCgStab,
    Cg,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bicgstab" => Ok(SolverKind::BiCgStab),
            "cg" => Ok(SolverKind::Cg),
            other => Err(Error::Parse(format!("unknown solver `{other}` (bicgstab|cg)"))),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::BiCgStab => "bicgstab",
            SolverKind::Cg => "cg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    SymmetricGaussSeidel,
    Ilu0,
    Jacobi,
}

impl std::str::FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgs" => Ok(PreconditionerKind::SymmetricGaussSeidel),
            "ilu0" => Ok(PreconditionerKind::Ilu0),
            "jacobi" => Ok(PreconditionerKind::Jacobi),
            other => Err(Error::Parse(format!("unknown preconditioner `{other}` (sgs|ilu0|jacobi)"))),
        }
    }
}

impl std::fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PreconditionerKind::SymmetricGaussSeidel => "sgs",
            PreconditionerKind::Ilu0 => "ilu0",
            PreconditionerKind::Jacobi => "jacobi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub preconditioner: PreconditionerKind,
    /// Relative residual target `|b - Ax| / |b|`.
    pub tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kind: SolverKind::BiCgStab,
            preconditioner: PreconditionerKind::SymmetricGaussSeidel,
            tol: 1e-10,
            max_iter: None,
        }
    }
}

impl SolverOptions {
    /// Iteration cap: the explicit value, else `max(20 sqrt(n), 40_000)`.
    /// Locally refined meshes are much worse conditioned than their size
    /// suggests, hence the floor.
    pub fn max_iter_for(&self, n: usize) -> usize {
        self.max_iter.unwrap_or_else(|| ((20.0 * (n as f64).sqrt()).ceil() as usize).max(40_000))
    }
}

/// Solves `A x = b` with the configured method. A zero pivot in the
/// preconditioner setup falls back to Jacobi.
pub fn solve(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    if opts.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("solver tolerance must be positive, got {}", opts.tol)));
    }
    let maxit = opts.max_iter_for(a.n_rows());
    if opts.kind == SolverKind::Cg && opts.preconditioner == PreconditionerKind::SymmetricGaussSeidel {
        match cg_sgs(a, b, opts.tol, maxit) {
            Err(Error::ZeroPivot { .. }) => return cg(a, b, &Jacobi::new(a)?, opts.tol, maxit),
            other => return other,
        }
    }
    let built: Result<Box<dyn Preconditioner + '_>> = match opts.preconditioner {
        PreconditionerKind::SymmetricGaussSeidel => SymmetricGaussSeidel::new(a).map(|p| Box::new(p) as _),
        PreconditionerKind::Ilu0 => Ilu0::new(a).map(|p| Box::new(p) as _),
        PreconditionerKind::Jacobi => Jacobi::new(a).map(|p| Box::new(p) as _),
    };
    let precond = match built {
        Ok(p) => p,
        Err(Error::ZeroPivot { .. }) => Box::new(Jacobi::new(a)?),
        Err(e) => return Err(e),
    };
    match opts.kind {
        SolverKind::BiCgStab => bicgstab(a, b, precond.as_ref(), opts.tol, maxit),
        SolverKind::Cg => cg(a, b, precond.as_ref(), opts.tol, maxit),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sum_k vals[k] * x[cols[k]]` with four interleaved partial sums, which
/// shortens the floating-point dependency chain while keeping a fixed order.
#[inline]
pub(crate) fn sparse_dot(cols: &[usize], vals: &[f64], x: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut cc = cols.chunks_exact(4);
    let mut vc = vals.chunks_exact(4);
    for (c, v) in (&mut cc).zip(&mut vc) {
        for k in 0..4 {
            acc[k] += v[k] * x[c[k]];
        }
    }
    let mut tail = 0.0;
    for (&c, v) in cc.remainder().iter().zip(vc.remainder()) {
        tail += v * x[c];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
