//! Error norms, functional values, error indicators and convergence rates.
//!
//! The energy norm of the error is
//!
//! ```text
//! |||(e_u, e_p)|||^2 = sum_K |e_u|^2 + |curl e_u|^2 + |e_p|^2 + |curl e_p|^2
//!                    + sum_{all F} h_F^{-1} |[n x e_u]|^2
//!                    + sum_{interior F} h_F^{-1} |[n x e_p]|^2
//! ```
//!
//! where on boundary faces the jump of `e_u` is `n x u_h - n x u_exact`.
//! Everything here is evaluated pointwise through [`DgSpace::eval`], never
//! through the assembled matrix, so it provides an independent check of the
//! assembly.

use crate::assembly::{cell_points, LsqForm, QuadratureSet};
use crate::error::{Error, Result};
use crate::femspace::{DgSpace, FieldPair};
use crate::problems::{check_point, MaxwellProblem};
use nalgebra::Vector3;
use std::fmt::Write as _;

/// Integrated squared quantities on one discrete field.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Squares {
    u: f64,
    p: f64,
    curl_u: f64,
    curl_p: f64,
}

fn cell_error_squares(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    field: &FieldPair,
    quad: &QuadratureSet,
    c: usize,
) -> Result<Squares> {
    let mut s = Squares::default();
    let (pts, wts) = cell_points(space, &quad.cell, c);
    for (x, w) in pts.iter().zip(&wts) {
        check_point(problem, x)?;
        let v = space.eval(field, c, x);
        s.u += w * (problem.u(x) - v.u).norm_squared();
        s.p += w * (problem.p(x) - v.p).norm_squared();
        s.curl_u += w * (problem.curl_u(x) - v.curl_u).norm_squared();
        s.curl_p += w * (problem.curl_p(x) - v.curl_p).norm_squared();
    }
    Ok(s)
}

/// `(int |[n x u_h]|^2, int |[n x p_h]|^2)` over interior face `f`.
fn interior_jumps(space: &DgSpace, field: &FieldPair, quad: &QuadratureSet, f: usize) -> Result<(f64, f64)> {
    let face = &space.faces.interior[f];
    let (pts, wts) = quad.face.map_to_face(space.mesh, &face.vertices)?;
    let n = face.normal;
    let (mut ju, mut jp) = (0.0, 0.0);
    for (x, w) in pts.iter().zip(&wts) {
        let a = space.eval(field, face.plus, x);
        let b = space.eval(field, face.minus, x);
        ju += w * n.cross(&(a.u - b.u)).norm_squared();
        jp += w * n.cross(&(a.p - b.p)).norm_squared();
    }
    Ok((ju, jp))
}

/// `int |n x u_h - n x u_exact|^2` over boundary face `f`.
fn boundary_mismatch(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    field: &FieldPair,
    quad: &QuadratureSet,
    f: usize,
) -> Result<f64> {
    let face = &space.faces.boundary[f];
    let (pts, wts) = quad.face.map_to_face(space.mesh, &face.vertices)?;
    let mut s = 0.0;
    for (x, w) in pts.iter().zip(&wts) {
        check_point(problem, x)?;
        let v = space.eval(field, face.cell, x);
        s += w * (face.normal.cross(&v.u) - problem.boundary_trace(x, &face.normal)).norm_squared();
    }
    Ok(s)
}

/// Squared least-squares residuals of `field` on cell `c`.
fn cell_residual(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    k: f64,
    field: &FieldPair,
    quad: &QuadratureSet,
    c: usize,
) -> Result<f64> {
    let (pts, wts) = cell_points(space, &quad.cell, c);
    let mut s = 0.0;
    for (x, w) in pts.iter().zip(&wts) {
        check_point(problem, x)?;
        let v = space.eval(field, c, x);
        let r1: Vector3<f64> = v.curl_p - k * v.u - problem.source(x) / k;
        let r2: Vector3<f64> = v.curl_u - k * v.p;
        s += w * (r1.norm_squared() + r2.norm_squared());
    }
    Ok(s)
}

/// `L^2` errors `(|u - u_h|, |p - p_h|)`.
pub fn l2_errors(space: &DgSpace, problem: &dyn MaxwellProblem, field: &FieldPair, quad: &QuadratureSet) -> Result<(f64, f64)> {
    let (mut u, mut p) = (0.0, 0.0);
    for c in 0..space.mesh.num_cells() {
        let s = cell_error_squares(space, problem, field, quad, c)?;
        u += s.u;
        p += s.p;
    }
    Ok((u.sqrt(), p.sqrt()))
}

/// Energy-norm errors `(|||e_u|||, |||e_p|||)`.
pub fn energy_errors(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    field: &FieldPair,
    quad: &QuadratureSet,
) -> Result<(f64, f64)> {
    let (mut eu, mut ep) = (0.0, 0.0);
    for c in 0..space.mesh.num_cells() {
        let s = cell_error_squares(space, problem, field, quad, c)?;
        eu += s.u + s.curl_u;
        ep += s.p + s.curl_p;
    }
    for (f, face) in space.faces.interior.iter().enumerate() {
        // the exact fields have continuous tangential traces
        let (ju, jp) = interior_jumps(space, field, quad, f)?;
        eu += ju / face.diameter;
        ep += jp / face.diameter;
    }
    for (f, face) in space.faces.boundary.iter().enumerate() {
        eu += boundary_mismatch(space, problem, field, quad, f)? / face.diameter;
    }
    Ok((eu.sqrt(), ep.sqrt()))
}

/// Combined energy error `sqrt(|||e_u|||^2 + |||e_p|||^2)`.
pub fn energy_error(space: &DgSpace, problem: &dyn MaxwellProblem, field: &FieldPair, quad: &QuadratureSet) -> Result<f64> {
    let (eu, ep) = energy_errors(space, problem, field, quad)?;
    Ok(eu.hypot(ep))
}

/// Value of the discrete least-squares functional at `field`.
pub fn functional_value(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    form: &LsqForm,
    field: &FieldPair,
    quad: &QuadratureSet,
) -> Result<f64> {
    let mut j = 0.0;
    for c in 0..space.mesh.num_cells() {
        j += cell_residual(space, problem, form.k, field, quad, c)?;
    }
    for (f, face) in space.faces.interior.iter().enumerate() {
        let (ju, jp) = interior_jumps(space, field, quad, f)?;
        j += form.mu / face.diameter * (ju + jp);
    }
    for (f, face) in space.faces.boundary.iter().enumerate() {
        j += form.mu / face.diameter * boundary_mismatch(space, problem, field, quad, f)?;
    }
    Ok(j)
}

/// Squared local error indicators `eta_K^2`: the cell residuals plus the
/// `h^{-1}`-weighted jumps on every face of `K` (interior faces count for
/// both neighbours).
pub fn indicators(space: &DgSpace, problem: &dyn MaxwellProblem, field: &FieldPair, quad: &QuadratureSet) -> Result<Vec<f64>> {
    let k = problem.wave_number();
    let mut eta = (0..space.mesh.num_cells())
        .map(|c| cell_residual(space, problem, k, field, quad, c))
        .collect::<Result<Vec<f64>>>()?;
    for (f, face) in space.faces.interior.iter().enumerate() {
        let (ju, jp) = interior_jumps(space, field, quad, f)?;
        let v = (ju + jp) / face.diameter;
        eta[face.plus] += v;
        eta[face.minus] += v;
    }
    for (f, face) in space.faces.boundary.iter().enumerate() {
        eta[face.cell] += boundary_mismatch(space, problem, field, quad, f)? / face.diameter;
    }
    Ok(eta)
}

/// `sum_{interior F} h_F^{-1} (|[n x u_h]|^2 + |[n x p_h]|^2)`.
pub fn interior_jump_sum(space: &DgSpace, field: &FieldPair, quad: &QuadratureSet) -> Result<f64> {
    let mut s = 0.0;
    for (f, face) in space.faces.interior.iter().enumerate() {
        let (ju, jp) = interior_jumps(space, field, quad, f)?;
        s += (ju + jp) / face.diameter;
    }
    Ok(s)
}

/// Errors and sizes of one discrete solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// Largest cell diameter.
    pub h: f64,
    /// Nominal mesh size `1/n` of a structured mesh, if any.
    pub h_nominal: Option<f64>,
    pub n_cells: usize,
    pub n_dofs: usize,
    pub energy_error: f64,
    pub l2_u: f64,
    pub l2_p: f64,
    /// Functional value at the discrete solution.
    pub j_h: f64,
    pub solver_iterations: usize,
}

/// Computes all error measures of `field`.
pub fn error_report(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    form: &LsqForm,
    field: &FieldPair,
    quad: &QuadratureSet,
    solver_iterations: usize,
) -> Result<ErrorReport> {
    let (l2_u, l2_p) = l2_errors(space, problem, field, quad)?;
    Ok(ErrorReport {
        h: space.mesh.mesh_size(),
        h_nominal: None,
        n_cells: space.mesh.num_cells(),
        n_dofs: space.dofmap.total_dofs(),
        energy_error: energy_error(space, problem, field, quad)?,
        l2_u,
        l2_p,
        j_h: functional_value(space, problem, form, field, quad)?,
        solver_iterations,
    })
}

/// Observed orders `log2(e_i / e_{i+1})` between consecutive halvings of `h`;
/// `None` when either error is not positive.
pub fn convergence_orders(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| (w[0] > 0.0 && w[1] > 0.0).then(|| (w[0] / w[1]).log2()))
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 || x.iter().chain(y).any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter("slope needs at least two positive samples".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("slope needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// A convergence study over successively refined meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub levels: Vec<ErrorReport>,
}

impl ConvergenceRecord {
    fn column(&self, f: impl Fn(&ErrorReport) -> f64) -> Vec<f64> {
        self.levels.iter().map(f).collect()
    }

    pub fn energy_orders(&self) -> Vec<Option<f64>> {
        convergence_orders(&self.column(|r| r.energy_error))
    }

    pub fn l2_u_orders(&self) -> Vec<Option<f64>> {
        convergence_orders(&self.column(|r| r.l2_u))
    }

    pub fn l2_p_orders(&self) -> Vec<Option<f64>> {
        convergence_orders(&self.column(|r| r.l2_p))
    }

    /// CSV with one row per level; order columns are empty on the first row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,n_cells,n_dofs,energy,order_energy,l2_u,order_u,l2_p,order_p,Jh,solver_iters\n");
        let (oe, ou, op) = (self.energy_orders(), self.l2_u_orders(), self.l2_p_orders());
        let fmt = |o: Option<&Option<f64>>| match o {
            Some(Some(v)) => format!("{v:.2}"),
            _ => String::new(),
        };
        for (i, r) in self.levels.iter().enumerate() {
            let prev = i.checked_sub(1);
            let pick = |v: &Vec<Option<f64>>| fmt(prev.and_then(|j| v.get(j)));
            writeln!(
                s,
                "{:.3e},{},{},{:.3e},{},{:.3e},{},{:.3e},{},{:.3e},{}",
                r.h_nominal.unwrap_or(r.h),
                r.n_cells,
                r.n_dofs,
                r.energy_error,
                pick(&oe),
                r.l2_u,
                pick(&ou),
                r.l2_p,
                pick(&op),
                r.j_h,
                r.solver_iterations
            )
            .unwrap();
        }
        s
    }
}
