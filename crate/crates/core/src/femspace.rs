//! Discontinuous piecewise-polynomial spaces for the pair `(u, p)`.
//!
//! On every cell both fields are componentwise polynomials of total degree
//! `m`. The scalar basis consists of monomials orthonormalized (Cholesky of
//! the exact Gram matrix) on the reference simplex and mapped affinely.
//!
//! Fields are embedded in three-dimensional space. In 2D the field `u` lives
//! in the `xy` plane and the scalar `p` is stored as the `z` component, which
//! makes the 2D curl conventions fall out of the ordinary cross product:
//!
//! * `curl u = du2/dx - du1/dy` is the `z` component of `grad x (u1, u2, 0)`,
//! * `curl p = (dp/dy, -dp/dx)` is the `xy` part of `grad x (0, 0, p)`,
//! * `n x u` and `n x p` are ordinary cross products with `n = (n1, n2, 0)`.

use crate::error::{Error, Result};
use crate::mesh::{CellGeometry, FaceSet, Point, SimplicialMesh};
use nalgebra::{DMatrix, Vector3};

/// Axes carrying the components of `u` (and of `curl p`, `n x p`).
pub fn u_axes(dim: usize) -> &'static [usize] {
    if dim == 2 {
        &[0, 1]
    } else {
        &[0, 1, 2]
    }
}

/// Axes carrying the components of `p` (and of `curl u`, `n x u`).
pub fn p_axes(dim: usize) -> &'static [usize] {
    if dim == 2 {
        &[2]
    } else {
        &[0, 1, 2]
    }
}

/// Tangential trace `n x v` in the embedded convention: for a 2D vector `v`
/// this is the scalar `n1 v2 - n2 v1` (in `z`), for a 2D scalar `q` (stored in
/// `z`) the vector `(q n2, -q n1)`.
pub fn tangential_trace(n: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    n.cross(v)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of scalar basis functions of `P_m` in `dim` variables.
pub fn basis_size(dim: usize, m: usize) -> usize {
    binomial(m + dim, dim)
}

/// Orthonormal basis of `P_m` on the reference simplex.
#[derive(Debug, Clone)]
pub struct ScalarBasis {
    dim: usize,
    degree: usize,
    exponents: Vec<[u32; 3]>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: DMatrix<f64>,
}

impl ScalarBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("dimension {dim}")));
        }
        if degree > 8 {
            return Err(Error::InvalidParameter(format!("polynomial degree {degree} > 8")));
        }
        let mut exponents = Vec::new();
        for total in 0..=degree as u32 {
            for a in (0..=total).rev() {
                if dim == 2 {
                    exponents.push([a, total - a, 0]);
                } else {
                    for b in (0..=total - a).rev() {
                        exponents.push([a, b, total - a - b]);
                    }
                }
            }
        }
        let n = exponents.len();
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            let e: Vec<u32> = (0..3).map(|k| exponents[i][k] + exponents[j][k]).collect();
            fact(e[0]) * fact(e[1]) * fact(e[2]) / fact(e[0] + e[1] + e[2] + dim as u32)
        });
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("monomial Gram matrix not positive definite".into()))?;
        let l = chol.l();
        let coeffs = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::InvalidParameter("singular Cholesky factor".into()))?;
        Ok(ScalarBasis {
            dim,
            degree,
            exponents,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Values and reference gradients at reference point `xi`.
    pub fn eval_into(&self, xi: &Point, values: &mut [f64], grads: &mut [Vector3<f64>]) {
        let m = self.degree;
        let mut pw = [[1.0; 9]; 3];
        for k in 0..self.dim {
            for e in 1..=m {
                pw[k][e] = pw[k][e - 1] * xi[k];
            }
        }
        let n = self.len();
        let mut mono = [0.0; 165];
        let mut dmono = [Vector3::zeros(); 165];
        for (j, e) in self.exponents.iter().enumerate() {
            let [a, b, c] = e.map(|x| x as usize);
            mono[j] = pw[0][a] * pw[1][b] * pw[2][c];
            let dx = if a > 0 { a as f64 * pw[0][a - 1] * pw[1][b] * pw[2][c] } else { 0.0 };
            let dy = if b > 0 { b as f64 * pw[0][a] * pw[1][b - 1] * pw[2][c] } else { 0.0 };
            let dz = if c > 0 { c as f64 * pw[0][a] * pw[1][b] * pw[2][c - 1] } else { 0.0 };
            dmono[j] = Vector3::new(dx, dy, dz);
        }
        for i in 0..n {
            let mut v = 0.0;
            let mut g = Vector3::zeros();
            // coefficient matrix is lower triangular
            for j in 0..=i {
                let c = self.coeffs[(i, j)];
                v += c * mono[j];
                g += c * dmono[j];
            }
            values[i] = v;
            grads[i] = g;
        }
    }

    pub fn eval(&self, xi: &Point) -> (Vec<f64>, Vec<Vector3<f64>>) {
        let mut v = vec![0.0; self.len()];
        let mut g = vec![Vector3::zeros(); self.len()];
        self.eval_into(xi, &mut v, &mut g);
        (v, g)
    }
}

/// Values and reference gradients of the degree-`m` basis at a reference point.
pub fn eval_scalar_basis(dim: usize, m: usize, xi: &Point) -> Result<(Vec<f64>, Vec<Vector3<f64>>)> {
    Ok(ScalarBasis::new(dim, m)?.eval(xi))
}

/// Element-local layout of the discontinuous unknowns.
///
/// Ordering is cell-major, then component (the `dim` components of `u`
/// followed by the `2 dim - 3` components of `p`), then basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub dim: usize,
    pub degree: usize,
    pub n_basis: usize,
    pub u_components: usize,
    pub p_components: usize,
    pub n_cells: usize,
}

impl DofMap {
    pub fn new(dim: usize, degree: usize, n_cells: usize) -> Self {
        DofMap {
            dim,
            degree,
            n_basis: basis_size(dim, degree),
            u_components: dim,
            p_components: 2 * dim - 3,
            n_cells,
        }
    }

    pub fn components(&self) -> usize {
        self.u_components + self.p_components
    }

    /// Unknowns per cell.
    pub fn block_len(&self) -> usize {
        self.components() * self.n_basis
    }

    pub fn cell_offset(&self, c: usize) -> usize {
        c * self.block_len()
    }

    /// Global index of basis function `i` of component `comp` on cell `c`.
    pub fn index(&self, c: usize, comp: usize, i: usize) -> usize {
        self.cell_offset(c) + comp * self.n_basis + i
    }

    pub fn total_dofs(&self) -> usize {
        self.n_cells * self.block_len()
    }

    /// Embedding axis of local component `comp`.
    pub fn axis(&self, comp: usize) -> usize {
        if comp < self.u_components {
            u_axes(self.dim)[comp]
        } else {
            p_axes(self.dim)[comp - self.u_components]
        }
    }
}

/// Coefficients of a discrete pair `(u_h, p_h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub dofmap: DofMap,
    pub coeffs: Vec<f64>,
}

impl FieldPair {
    pub fn zeros(dofmap: DofMap) -> Self {
        FieldPair {
            dofmap,
            coeffs: vec![0.0; dofmap.total_dofs()],
        }
    }

    pub fn from_coeffs(dofmap: DofMap, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dofmap.total_dofs() {
            return Err(Error::DimensionMismatch {
                expected: dofmap.total_dofs(),
                found: coeffs.len(),
            });
        }
        Ok(FieldPair { dofmap, coeffs })
    }

    /// Coefficients of all components on cell `c`.
    pub fn cell_block(&self, c: usize) -> &[f64] {
        let off = self.dofmap.cell_offset(c);
        &self.coeffs[off..off + self.dofmap.block_len()]
    }

    /// Coefficients of component `comp` of `u` on cell `c`.
    pub fn u_block(&self, c: usize, comp: usize) -> &[f64] {
        let i = self.dofmap.index(c, comp, 0);
        &self.coeffs[i..i + self.dofmap.n_basis]
    }

    /// Coefficients of component `comp` of `p` on cell `c`.
    pub fn p_block(&self, c: usize, comp: usize) -> &[f64] {
        let i = self.dofmap.index(c, self.dofmap.u_components + comp, 0);
        &self.coeffs[i..i + self.dofmap.n_basis]
    }
}

/// Values of a discrete pair and its curls at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub u: Vector3<f64>,
    pub p: Vector3<f64>,
    pub curl_u: Vector3<f64>,
    pub curl_p: Vector3<f64>,
}

/// Mesh + faces + basis + layout: everything needed to evaluate and assemble.
#[derive(Debug, Clone)]
pub struct DgSpace<'a> {
    pub mesh: &'a SimplicialMesh,
    pub faces: &'a FaceSet,
    pub basis: ScalarBasis,
    pub dofmap: DofMap,
    geometry: Vec<CellGeometry>,
}

impl<'a> DgSpace<'a> {
    pub fn new(mesh: &'a SimplicialMesh, faces: &'a FaceSet, degree: usize) -> Result<Self> {
        if faces.cell_faces.len() != mesh.num_cells() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_cells(),
                found: faces.cell_faces.len(),
            });
        }
        let basis = ScalarBasis::new(mesh.dim(), degree)?;
        let geometry = (0..mesh.num_cells()).map(|c| mesh.geometry(c)).collect::<Result<_>>()?;
        Ok(DgSpace {
            mesh,
            faces,
            basis,
            dofmap: DofMap::new(mesh.dim(), degree, mesh.num_cells()),
            geometry,
        })
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    /// Basis values and physical gradients of cell `c` at physical point `x`.
    pub fn basis_at(&self, c: usize, x: &Point, values: &mut [f64], grads: &mut [Vector3<f64>]) {
        let g = &self.geometry[c];
        self.basis.eval_into(&g.to_reference(x), values, grads);
        for gr in grads.iter_mut() {
            *gr = g.push_gradient(gr);
        }
    }

    /// Combines per-basis values/gradients with the coefficients of cell `c`.
    pub fn combine(&self, field: &FieldPair, c: usize, values: &[f64], grads: &[Vector3<f64>]) -> PointValues {
        let dm = &self.dofmap;
        let block = field.cell_block(c);
        let mut out = PointValues {
            u: Vector3::zeros(),
            p: Vector3::zeros(),
            curl_u: Vector3::zeros(),
            curl_p: Vector3::zeros(),
        };
        for comp in 0..dm.components() {
            let coef = &block[comp * dm.n_basis..(comp + 1) * dm.n_basis];
            let mut s = 0.0;
            let mut g = Vector3::zeros();
            for i in 0..dm.n_basis {
                s += coef[i] * values[i];
                g += coef[i] * grads[i];
            }
            let axis = dm.axis(comp);
            let curl = g.cross(&Vector3::ith(axis, 1.0));
            if comp < dm.u_components {
                out.u[axis] = s;
                out.curl_u += curl;
            } else {
                out.p[axis] = s;
                out.curl_p += curl;
            }
        }
        out
    }

    /// Evaluates `u_h`, `p_h` and both curls on cell `c` at physical point `x`.
    pub fn eval(&self, field: &FieldPair, c: usize, x: &Point) -> PointValues {
        let n = self.basis.len();
        let mut v = vec![0.0; n];
        let mut g = vec![Vector3::zeros(); n];
        self.basis_at(c, x, &mut v, &mut g);
        self.combine(field, c, &v, &g)
    }

    pub fn eval_u(&self, field: &FieldPair, c: usize, x: &Point) -> Vector3<f64> {
        self.eval(field, c, x).u
    }

    pub fn eval_p(&self, field: &FieldPair, c: usize, x: &Point) -> Vector3<f64> {
        self.eval(field, c, x).p
    }

    pub fn eval_curl_u(&self, field: &FieldPair, c: usize, x: &Point) -> Vector3<f64> {
        self.eval(field, c, x).curl_u
    }

    pub fn eval_curl_p(&self, field: &FieldPair, c: usize, x: &Point) -> Vector3<f64> {
        self.eval(field, c, x).curl_p
    }

    /// Cellwise `L^2` projection of the given `u` and `p` fields. Exact for
    /// polynomials of degree `<= m` when the quadrature degree is at least `2m`.
    pub fn project<U, P>(&self, u: U, p: P, quad_degree: usize) -> Result<FieldPair>
    where
        U: Fn(&Point) -> Vector3<f64>,
        P: Fn(&Point) -> Vector3<f64>,
    {
        let rule = crate::quadrature::simplex_rule(self.dim(), quad_degree)?;
        let dm = self.dofmap;
        let mut field = FieldPair::zeros(dm);
        let n = self.basis.len();
        let mut vals = vec![0.0; n];
        let mut grads = vec![Vector3::zeros(); n];
        for c in 0..self.mesh.num_cells() {
            let g = &self.geometry[c];
            for (xi, w) in rule.points.iter().zip(&rule.weights) {
                let x = g.to_physical(xi);
                self.basis.eval_into(xi, &mut vals, &mut grads);
                let (uv, pv) = (u(&x), p(&x));
                for comp in 0..dm.components() {
                    let axis = dm.axis(comp);
                    let val = if comp < dm.u_components { uv[axis] } else { pv[axis] };
                    for i in 0..n {
                        // reference basis is orthonormal, so the Jacobian cancels
                        field.coeffs[dm.index(c, comp, i)] += w * val * vals[i];
                    }
                }
            }
        }
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_faces, unit_cube_mesh, unit_square_mesh};
    use crate::quadrature::simplex_rule;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ref_point(dim: usize, rng: &mut ChaCha8Rng) -> Point {
        loop {
            let p = Point::new(rng.gen(), rng.gen(), if dim == 3 { rng.gen() } else { 0.0 });
            if p.x + p.y + p.z < 0.95 && p.x > 0.02 && p.y > 0.02 && (dim == 2 || p.z > 0.02) {
                return p;
            }
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(basis_size(2, 0), 1);
        assert_eq!(basis_size(2, 3), 10);
        assert_eq!(basis_size(3, 2), 10);
        let dm = DofMap::new(2, 1, 7);
        assert_eq!(dm.block_len(), 9);
        assert_eq!(dm.total_dofs(), 63);
        let dm = DofMap::new(3, 2, 5);
        assert_eq!((dm.u_components, dm.p_components), (3, 3));
        assert_eq!(dm.total_dofs(), 5 * 6 * 10);
    }

    #[test]
    fn constant_basis() {
        let (v, g) = eval_scalar_basis(2, 0, &Point::new(0.3, 0.3, 0.0)).unwrap();
        assert_eq!(v.len(), 1);
        assert_relative_eq!(v[0], 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(g[0], Vector3::zeros());
    }

    #[test]
    fn basis_is_orthonormal() {
        for (dim, m) in [(2, 3), (3, 2)] {
            let basis = ScalarBasis::new(dim, m).unwrap();
            let rule = simplex_rule(dim, 2 * m).unwrap();
            let n = basis.len();
            let mut gram = DMatrix::<f64>::zeros(n, n);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let (v, _) = basis.eval(p);
                for i in 0..n {
                    for j in 0..n {
                        gram[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            assert_relative_eq!(gram, DMatrix::identity(n, n), epsilon = 1e-11);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (dim, m) in [(2, 3), (3, 3)] {
            let basis = ScalarBasis::new(dim, m).unwrap();
            for _ in 0..10 {
                let x = random_ref_point(dim, &mut rng);
                let (_, g) = basis.eval(&x);
                let h = 1e-5;
                for k in 0..dim {
                    let e = Vector3::ith(k, h);
                    let (vp, _) = basis.eval(&(x + e));
                    let (vm, _) = basis.eval(&(x - e));
                    for i in 0..basis.len() {
                        assert!(((vp[i] - vm[i]) / (2.0 * h) - g[i][k]).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn tangential_trace_conventions() {
        let n = Vector3::new(1.0, 0.0, 0.0);
        assert_eq!(tangential_trace(&n, &Vector3::new(0.0, 1.0, 0.0)), Vector3::new(0.0, 0.0, 1.0));
        // 2D scalar q = 2 with n = (n1, n2): (q n2, -q n1)
        let n = Vector3::new(0.6, 0.8, 0.0);
        let t = tangential_trace(&n, &Vector3::new(0.0, 0.0, 2.0));
        assert_relative_eq!(t, Vector3::new(1.6, -1.2, 0.0), epsilon = 1e-15);
        let v = Vector3::new(0.3, -1.1, 0.7);
        assert_eq!(tangential_trace(&n, &v), -tangential_trace(&(-n), &v));
    }

    fn poly_pair(dim: usize) -> (impl Fn(&Point) -> Vector3<f64>, impl Fn(&Point) -> Vector3<f64>) {
        let u = move |x: &Point| {
            if dim == 2 {
                Vector3::new(x.x * x.y - 0.5, 2.0 * x.x * x.x + x.y, 0.0)
            } else {
                Vector3::new(x.y * x.z, x.x * x.x - x.z, x.x * x.y + 1.0)
            }
        };
        let p = move |x: &Point| {
            if dim == 2 {
                Vector3::new(0.0, 0.0, x.x - 3.0 * x.y * x.y)
            } else {
                Vector3::new(x.y * x.y, x.z, x.x * x.z)
            }
        };
        (u, p)
    }

    #[test]
    fn quadratic_fields_are_reproduced() {
        for mesh in [unit_square_mesh(2), unit_cube_mesh(1)] {
            let faces = build_faces(&mesh).unwrap();
            let space = DgSpace::new(&mesh, &faces, 2).unwrap();
            let (u, p) = poly_pair(mesh.dim());
            let field = space.project(&u, &p, 6).unwrap();
            for c in 0..mesh.num_cells() {
                let x = mesh.centroid(c) + Vector3::new(0.01, -0.02, if mesh.dim() == 3 { 0.005 } else { 0.0 });
                let v = space.eval(&field, c, &x);
                assert_relative_eq!(v.u, u(&x), epsilon = 1e-10);
                assert_relative_eq!(v.p, p(&x), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn zero_and_constant_fields() {
        let mesh = unit_square_mesh(2);
        let faces = build_faces(&mesh).unwrap();
        let space = DgSpace::new(&mesh, &faces, 1).unwrap();
        let x = mesh.centroid(3);
        let zero = FieldPair::zeros(space.dofmap);
        assert_eq!(space.eval_u(&zero, 3, &x), Vector3::zeros());
        let c = space
            .project(|_| Vector3::new(1.5, -2.0, 0.0), |_| Vector3::new(0.0, 0.0, 4.0), 2)
            .unwrap();
        assert_relative_eq!(space.eval_u(&c, 3, &x), Vector3::new(1.5, -2.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(space.eval_p(&c, 3, &x), Vector3::new(0.0, 0.0, 4.0), epsilon = 1e-12);
        assert_relative_eq!(space.eval_curl_u(&c, 3, &x), Vector3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn two_dimensional_curls() {
        let mesh = unit_square_mesh(1);
        let faces = build_faces(&mesh).unwrap();
        let space = DgSpace::new(&mesh, &faces, 1).unwrap();
        let rot = space
            .project(|x| Vector3::new(-x.y, x.x, 0.0), |x| Vector3::new(0.0, 0.0, x.x), 2)
            .unwrap();
        let x = Point::new(0.6, 0.3, 0.0);
        assert_relative_eq!(space.eval_curl_u(&rot, 0, &x), Vector3::new(0.0, 0.0, 2.0), epsilon = 1e-12);
        assert_relative_eq!(space.eval_curl_p(&rot, 0, &x), Vector3::new(0.0, -1.0, 0.0), epsilon = 1e-12);
        let py = space
            .project(|_| Vector3::zeros(), |x| Vector3::new(0.0, 0.0, x.y), 2)
            .unwrap();
        assert_relative_eq!(space.eval_curl_p(&py, 1, &x), Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let mesh = unit_square_mesh(2);
        let faces = build_faces(&mesh).unwrap();
        let space = DgSpace::new(&mesh, &faces, 2).unwrap();
        // u = grad(x^2 y + y^2)
        let f = space
            .project(|x| Vector3::new(2.0 * x.x * x.y, x.x * x.x + 2.0 * x.y, 0.0), |_| Vector3::zeros(), 4)
            .unwrap();
        let rule = simplex_rule(2, 4).unwrap();
        for c in 0..mesh.num_cells() {
            let (pts, _) = rule.map_to_cell(&mesh, c).unwrap();
            for x in &pts {
                assert!(space.eval_curl_u(&f, c, x).norm() < 1e-12);
            }
        }
    }

    fn random_field(space: &DgSpace, rng: &mut ChaCha8Rng) -> FieldPair {
        let coeffs = (0..space.dofmap.total_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        FieldPair::from_coeffs(space.dofmap, coeffs).unwrap()
    }

    #[test]
    fn curls_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for mesh in [unit_square_mesh(2), unit_cube_mesh(1)] {
            let faces = build_faces(&mesh).unwrap();
            let space = DgSpace::new(&mesh, &faces, 2).unwrap();
            let field = random_field(&space, &mut rng);
            let h = 1e-5;
            for c in 0..mesh.num_cells().min(6) {
                let x = mesh.centroid(c);
                let d = |f: &dyn Fn(&Point) -> Vector3<f64>, k: usize, axis: usize| {
                    let e = Vector3::ith(k, h);
                    (f(&(x + e))[axis] - f(&(x - e))[axis]) / (2.0 * h)
                };
                let u = |y: &Point| space.eval_u(&field, c, y);
                let p = |y: &Point| space.eval_p(&field, c, y);
                let v = space.eval(&field, c, &x);
                if mesh.dim() == 2 {
                    assert!((v.curl_u.z - (d(&u, 0, 1) - d(&u, 1, 0))).abs() < 1e-6);
                    assert!((v.curl_p.x - d(&p, 1, 2)).abs() < 1e-6);
                    assert!((v.curl_p.y + d(&p, 0, 2)).abs() < 1e-6);
                } else {
                    let curl = |f: &dyn Fn(&Point) -> Vector3<f64>| {
                        Vector3::new(d(f, 1, 2) - d(f, 2, 1), d(f, 2, 0) - d(f, 0, 2), d(f, 0, 1) - d(f, 1, 0))
                    };
                    assert!((v.curl_u - curl(&u)).norm() < 1e-6);
                    assert!((v.curl_p - curl(&p)).norm() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn curl_adjoint_identity_on_a_cell() {
        // int_K curl u q - int_K u . curl q = int_{dK} (n x u) . q  (2D)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = vec![Point::new(0.1, 0.2, 0.0), Point::new(1.3, 0.4, 0.0), Point::new(0.5, 1.1, 0.0)];
        let mesh = SimplicialMesh::new(2, v, vec![vec![0, 1, 2]]).unwrap();
        let faces = build_faces(&mesh).unwrap();
        for m in 1..=3 {
            let space = DgSpace::new(&mesh, &faces, m).unwrap();
            let field = random_field(&space, &mut rng);
            let cell_rule = simplex_rule(2, 2 * m).unwrap();
            let (pts, w) = cell_rule.map_to_cell(&mesh, 0).unwrap();
            let mut lhs = 0.0;
            for (x, w) in pts.iter().zip(&w) {
                let val = space.eval(&field, 0, x);
                lhs += w * (val.curl_u.dot(&val.p) - val.u.dot(&val.curl_p));
            }
            let seg = simplex_rule(1, 2 * m).unwrap();
            let mut rhs = 0.0;
            for f in &faces.boundary {
                let (pts, w) = seg.map_to_face(&mesh, &f.vertices).unwrap();
                for (x, w) in pts.iter().zip(&w) {
                    let val = space.eval(&field, 0, x);
                    rhs += w * tangential_trace(&f.normal, &val.u).dot(&val.p);
                }
            }
            assert!((lhs - rhs).abs() < 1e-10, "m={m}: {lhs} vs {rhs}");
        }
    }
}
