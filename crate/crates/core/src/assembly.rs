//! Assembly of the discontinuous least-squares system.
//!
//! The discrete functional is
//!
//! ```text
//! J_h(u, p) = sum_K |curl p - k u - f/k|^2_K + |curl u - k p|^2_K
//!           + sum_{interior F} mu/h_F (|[n x u]|^2_F + |[n x p]|^2_F)
//!           + sum_{boundary F} mu/h_F |n x u - n x u_exact|^2_F
//! ```
//!
//! and its minimizer solves `A x = b` with `A` symmetric positive definite.
//! At every quadrature point the integrand is `|B x - t|^2` for a small
//! operator matrix `B`; local blocks are accumulated as `w B^T B` and `w B^T t`.
//!
//! The global matrix is stored in CSR form with one dense column block per
//! neighbouring cell, so the pattern is known before any integration and no
//! triplet list is needed.

use crate::error::{Error, Result};
use crate::femspace::{p_axes, u_axes, DgSpace, DofMap};
use crate::mesh::{FaceRef, Point};
use crate::problems::{check_point, MaxwellProblem};
use crate::quadrature::{simplex_rule, QuadratureRule};
use crate::solver::CsrMatrix;
use nalgebra::{DMatrix, DVector, Vector3};

/// Parameters of the least-squares functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqForm {
    pub k: f64,
    /// Penalty scaling of the face terms.
    pub mu: f64,
}

impl LsqForm {
    pub fn new(k: f64, mu: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("wave number must be positive, got {k}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("penalty must be positive, got {mu}")));
        }
        Ok(LsqForm { k, mu })
    }

    pub fn for_problem(problem: &dyn MaxwellProblem, mu: f64) -> Result<Self> {
        Self::new(problem.wave_number(), mu)
    }
}

/// Cell and face rules used together.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSet {
    pub cell: QuadratureRule,
    pub face: QuadratureRule,
}

impl QuadratureSet {
    pub fn with_degree(dim: usize, degree: usize) -> Result<Self> {
        Ok(QuadratureSet {
            cell: simplex_rule(dim, degree)?,
            face: simplex_rule(dim - 1, degree)?,
        })
    }

    /// Degree `2(m + 1)`: exact for the polynomial part of the system.
    pub fn for_assembly(dim: usize, m: usize) -> Result<Self> {
        Self::with_degree(dim, 2 * m + 2)
    }

    /// Degree `2m + 4`, used for error norms and functional values.
    pub fn for_errors(dim: usize, m: usize) -> Result<Self> {
        Self::with_degree(dim, 2 * m + 4)
    }
}

/// Assembled system `A x = b`.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub form: LsqForm,
    pub dofmap: DofMap,
}

impl SparseSystem {
    pub fn write_matrix_market<W: std::io::Write>(&self, w: W) -> Result<()> {
        self.matrix.write_matrix_market(w)
    }
}

/// Reusable per-point evaluation buffers.
struct Scratch {
    values: Vec<f64>,
    grads: Vec<Vector3<f64>>,
    values2: Vec<f64>,
    grads2: Vec<Vector3<f64>>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            values: vec![0.0; n],
            grads: vec![Vector3::zeros(); n],
            values2: vec![0.0; n],
            grads2: vec![Vector3::zeros(); n],
        }
    }
}

/// Fills `b` (rows: `curl p - k u` on the `u` axes, then `curl u - k p` on the
/// `p` axes) for the given basis values and physical gradients.
fn residual_operator(dm: &DofMap, k: f64, values: &[f64], grads: &[Vector3<f64>], b: &mut DMatrix<f64>) {
    let ua = u_axes(dm.dim);
    let pa = p_axes(dm.dim);
    let d = ua.len();
    let nb = dm.n_basis;
    b.fill(0.0);
    for comp in 0..dm.components() {
        let e = Vector3::ith(dm.axis(comp), 1.0);
        for i in 0..nb {
            let col = comp * nb + i;
            let curl = grads[i].cross(&e);
            if comp < dm.u_components {
                b[(comp, col)] = -k * values[i];
                for (q, &ax) in pa.iter().enumerate() {
                    b[(d + q, col)] = curl[ax];
                }
            } else {
                b[(d + comp - dm.u_components, col)] = -k * values[i];
                for (r, &ax) in ua.iter().enumerate() {
                    b[(r, col)] = curl[ax];
                }
            }
        }
    }
}

/// Fills `t` (rows: `n x u` on the `p` axes, then `n x p` on the `u` axes).
fn trace_operator(dm: &DofMap, n: &Vector3<f64>, values: &[f64], t: &mut DMatrix<f64>) {
    let ua = u_axes(dm.dim);
    let pa = p_axes(dm.dim);
    let c = pa.len();
    let nb = dm.n_basis;
    t.fill(0.0);
    for comp in 0..dm.components() {
        let ne = n.cross(&Vector3::ith(dm.axis(comp), 1.0));
        for i in 0..nb {
            let col = comp * nb + i;
            if comp < dm.u_components {
                for (q, &ax) in pa.iter().enumerate() {
                    t[(q, col)] = values[i] * ne[ax];
                }
            } else {
                for (r, &ax) in ua.iter().enumerate() {
                    t[(c + r, col)] = values[i] * ne[ax];
                }
            }
        }
    }
}

fn residual_rows(dim: usize) -> usize {
    u_axes(dim).len() + p_axes(dim).len()
}

fn cell_block(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    form: &LsqForm,
    rule: &QuadratureRule,
    c: usize,
    s: &mut Scratch,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let dm = &space.dofmap;
    let nloc = dm.block_len();
    let rows = residual_rows(dm.dim);
    let d = u_axes(dm.dim).len();
    let mut a = DMatrix::zeros(nloc, nloc);
    let mut rhs = DVector::zeros(nloc);
    let mut b = DMatrix::zeros(rows, nloc);
    let mut target = DVector::zeros(rows);
    let g = space.geometry(c);
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let x = g.to_physical(xi);
        check_point(problem, &x)?;
        let wx = w * g.det;
        space.basis.eval_into(xi, &mut s.values, &mut s.grads);
        for gr in s.grads.iter_mut() {
            *gr = g.push_gradient(gr);
        }
        residual_operator(dm, form.k, &s.values, &s.grads, &mut b);
        let f = problem.source(&x) / form.k;
        for (r, &ax) in u_axes(dm.dim).iter().enumerate() {
            target[r] = f[ax];
        }
        for q in 0..rows - d {
            target[d + q] = 0.0;
        }
        a.gemm_tr(wx, &b, &b, 1.0);
        rhs.gemv_tr(wx, &b, &target, 1.0);
    }
    Ok((a, rhs))
}

/// Returns `(M_pp, M_mm, M_pm)` with `M_xy = mu/h sum w T_x^T T_y`.
fn interior_face_blocks(
    space: &DgSpace,
    form: &LsqForm,
    rule: &QuadratureRule,
    f: usize,
    s: &mut Scratch,
) -> Result<[DMatrix<f64>; 3]> {
    let dm = &space.dofmap;
    let nloc = dm.block_len();
    let face = &space.faces.interior[f];
    let rows = residual_rows(dm.dim);
    let mut tp = DMatrix::zeros(rows, nloc);
    let mut tm = DMatrix::zeros(rows, nloc);
    let mut mpp = DMatrix::zeros(nloc, nloc);
    let mut mmm = DMatrix::zeros(nloc, nloc);
    let mut mpm = DMatrix::zeros(nloc, nloc);
    let (pts, wts) = rule.map_to_face(space.mesh, &face.vertices)?;
    let scale = form.mu / face.diameter;
    for (x, w) in pts.iter().zip(&wts) {
        space.basis_at(face.plus, x, &mut s.values, &mut s.grads);
        space.basis_at(face.minus, x, &mut s.values2, &mut s.grads2);
        trace_operator(dm, &face.normal, &s.values, &mut tp);
        trace_operator(dm, &face.normal, &s.values2, &mut tm);
        let ws = w * scale;
        mpp.gemm_tr(ws, &tp, &tp, 1.0);
        mmm.gemm_tr(ws, &tm, &tm, 1.0);
        mpm.gemm_tr(ws, &tp, &tm, 1.0);
    }
    Ok([mpp, mmm, mpm])
}

fn boundary_face_block(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    form: &LsqForm,
    rule: &QuadratureRule,
    f: usize,
    s: &mut Scratch,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let dm = &space.dofmap;
    let nloc = dm.block_len();
    let face = &space.faces.boundary[f];
    let pa = p_axes(dm.dim);
    let c = pa.len();
    let rows = residual_rows(dm.dim);
    let mut t = DMatrix::zeros(rows, nloc);
    let mut target = DVector::zeros(c);
    let mut a = DMatrix::zeros(nloc, nloc);
    let mut rhs = DVector::zeros(nloc);
    let (pts, wts) = rule.map_to_face(space.mesh, &face.vertices)?;
    let scale = form.mu / face.diameter;
    for (x, w) in pts.iter().zip(&wts) {
        check_point(problem, x)?;
        space.basis_at(face.cell, x, &mut s.values, &mut s.grads);
        trace_operator(dm, &face.normal, &s.values, &mut t);
        let tu = t.rows(0, c);
        let g = problem.boundary_trace(x, &face.normal);
        for (q, &ax) in pa.iter().enumerate() {
            target[q] = g[ax];
        }
        let ws = w * scale;
        a.gemm_tr(ws, &tu, &tu, 1.0);
        rhs.gemv_tr(ws, &tu, &target, 1.0);
    }
    Ok((a, rhs))
}

/// Element matrix and load vector of the volume terms on cell `c`.
pub fn local_cell_block(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    form: &LsqForm,
    quad: &QuadratureSet,
    c: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    cell_block(space, problem, form, &quad.cell, c, &mut Scratch::new(space.basis.len()))
}

/// Penalty matrix of interior face `f` on the unknowns of its plus cell
/// followed by those of its minus cell.
pub fn local_interior_face_block(space: &DgSpace, form: &LsqForm, quad: &QuadratureSet, f: usize) -> Result<DMatrix<f64>> {
    let nloc = space.dofmap.block_len();
    let [mpp, mmm, mpm] = interior_face_blocks(space, form, &quad.face, f, &mut Scratch::new(space.basis.len()))?;
    let mut out = DMatrix::zeros(2 * nloc, 2 * nloc);
    out.view_mut((0, 0), (nloc, nloc)).copy_from(&mpp);
    out.view_mut((nloc, nloc), (nloc, nloc)).copy_from(&mmm);
    out.view_mut((0, nloc), (nloc, nloc)).copy_from(&(-&mpm));
    out.view_mut((nloc, 0), (nloc, nloc)).copy_from(&(-mpm.transpose()));
    Ok(out)
}

/// Penalty matrix and load vector of boundary face `f` on the unknowns of its cell.
pub fn local_boundary_face_block(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    form: &LsqForm,
    quad: &QuadratureSet,
    f: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    boundary_face_block(space, problem, form, &quad.face, f, &mut Scratch::new(space.basis.len()))
}

/// Block-sparse CSR layout: row block `K` holds the column blocks of `K`
/// and its face neighbours in ascending order.
struct BlockPattern {
    nloc: usize,
    blocks: Vec<Vec<usize>>,
    row_ptr: Vec<usize>,
}

impl BlockPattern {
    fn new(space: &DgSpace) -> Self {
        let nloc = space.dofmap.block_len();
        let ncells = space.mesh.num_cells();
        let mut blocks = Vec::with_capacity(ncells);
        let mut row_ptr = Vec::with_capacity(ncells * nloc + 1);
        row_ptr.push(0);
        for c in 0..ncells {
            let mut b = space.faces.neighbors(c);
            b.push(c);
            b.sort_unstable();
            let len = b.len() * nloc;
            for _ in 0..nloc {
                row_ptr.push(row_ptr.last().unwrap() + len);
            }
            blocks.push(b);
        }
        BlockPattern { nloc, blocks, row_ptr }
    }

    fn col_idx(&self) -> Vec<usize> {
        let mut cols = Vec::with_capacity(*self.row_ptr.last().unwrap());
        for b in &self.blocks {
            for _ in 0..self.nloc {
                for &l in b {
                    cols.extend(l * self.nloc..(l + 1) * self.nloc);
                }
            }
        }
        cols
    }

    /// Adds `scale * m` to block `(k, l)`.
    fn add(&self, values: &mut [f64], k: usize, l: usize, m: &DMatrix<f64>, scale: f64) {
        let nloc = self.nloc;
        let b = &self.blocks[k];
        let slot = b.binary_search(&l).expect("column block outside pattern");
        let stride = b.len() * nloc;
        let base = self.row_ptr[k * nloc] + slot * nloc;
        for i in 0..nloc {
            let row = &mut values[base + i * stride..base + i * stride + nloc];
            for (j, v) in row.iter_mut().enumerate() {
                *v += scale * m[(i, j)];
            }
        }
    }
}

/// Assembles the least-squares system for `problem` on `space`.
pub fn assemble(
    space: &DgSpace,
    problem: &dyn MaxwellProblem,
    form: &LsqForm,
    quad: &QuadratureSet,
) -> Result<SparseSystem> {
    if problem.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: problem.dim(),
        });
    }
    let dm = space.dofmap;
    let nloc = dm.block_len();
    let pattern = BlockPattern::new(space);
    let mut values = vec![0.0; *pattern.row_ptr.last().unwrap()];
    let mut rhs = vec![0.0; dm.total_dofs()];
    let mut s = Scratch::new(space.basis.len());

    for c in 0..space.mesh.num_cells() {
        let (a, b) = cell_block(space, problem, form, &quad.cell, c, &mut s)?;
        pattern.add(&mut values, c, c, &a, 1.0);
        let off = dm.cell_offset(c);
        for i in 0..nloc {
            rhs[off + i] += b[i];
        }
        for fr in &space.faces.cell_faces[c] {
            if let FaceRef::Boundary { face } = *fr {
                let (a, b) = boundary_face_block(space, problem, form, &quad.face, face, &mut s)?;
                pattern.add(&mut values, c, c, &a, 1.0);
                for i in 0..nloc {
                    rhs[off + i] += b[i];
                }
            }
        }
    }
    for (f, face) in space.faces.interior.iter().enumerate() {
        let [mpp, mmm, mpm] = interior_face_blocks(space, form, &quad.face, f, &mut s)?;
        pattern.add(&mut values, face.plus, face.plus, &mpp, 1.0);
        pattern.add(&mut values, face.minus, face.minus, &mmm, 1.0);
        pattern.add(&mut values, face.plus, face.minus, &mpm, -1.0);
        pattern.add(&mut values, face.minus, face.plus, &mpm.transpose(), -1.0);
    }
    let n = dm.total_dofs();
    let matrix = CsrMatrix::new(n, n, pattern.row_ptr.clone(), pattern.col_idx(), values)?;
    Ok(SparseSystem {
        matrix,
        rhs,
        form: *form,
        dofmap: dm,
    })
}

/// Quadrature points of cell `c` with physical weights.
pub(crate) fn cell_points(space: &DgSpace, rule: &QuadratureRule, c: usize) -> (Vec<Point>, Vec<f64>) {
    let g = space.geometry(c);
    let pts = rule.points.iter().map(|xi| g.to_physical(xi)).collect();
    let wts = rule.weights.iter().map(|w| w * g.det).collect();
    (pts, wts)
}
