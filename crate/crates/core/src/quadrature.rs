//! Gauss-type quadrature on reference simplices.
//!
//! Rules are built by collapsing a tensor Gauss-Legendre rule onto the
//! simplex (Duffy transform). All weights are positive. Reference simplices
//! have vertices at the origin and the unit coordinate points, so their
//! measures are `1`, `1/2` and `1/6`.

use crate::error::{Error, Result};
use crate::mesh::{Point, SimplicialMesh};

pub const MAX_DEGREE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    /// Reference coordinates (unused trailing components are zero).
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Pushes the rule forward onto the simplex spanned by `vertices`
    /// (`dim + 1` points, possibly embedded in a higher-dimensional space).
    /// Weights are scaled by the measure ratio.
    pub fn map_to_simplex(&self, vertices: &[Point]) -> Result<(Vec<Point>, Vec<f64>)> {
        if vertices.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim + 1,
                found: vertices.len(),
            });
        }
        let origin = vertices[0];
        let edges: Vec<Point> = vertices[1..].iter().map(|v| v - origin).collect();
        // sqrt of the Gram determinant = |det J| for the embedded affine map
        let scale = match self.dim {
            1 => edges[0].norm(),
            2 => edges[0].cross(&edges[1]).norm(),
            _ => edges[0].dot(&edges[1].cross(&edges[2])).abs(),
        };
        let size = edges.iter().map(|e| e.norm()).fold(0.0, f64::max);
        if scale <= 1e-14 * size.powi(self.dim as i32) || scale == 0.0 {
            return Err(if self.dim == 3 {
                Error::DegenerateCell { cell: usize::MAX }
            } else {
                Error::DegenerateFace
            });
        }
        let points = self
            .points
            .iter()
            .map(|xi| {
                edges
                    .iter()
                    .enumerate()
                    .fold(origin, |acc, (k, e)| acc + xi[k] * e)
            })
            .collect();
        let weights = self.weights.iter().map(|w| w * scale).collect();
        Ok((points, weights))
    }

    /// Physical points and weights for cell `c` of `mesh`.
    pub fn map_to_cell(&self, mesh: &SimplicialMesh, c: usize) -> Result<(Vec<Point>, Vec<f64>)> {
        if self.dim != mesh.dim() {
            return Err(Error::DimensionMismatch {
                expected: mesh.dim(),
                found: self.dim,
            });
        }
        if c >= mesh.num_cells() {
            return Err(Error::CellOutOfRange {
                cell: c,
                ncells: mesh.num_cells(),
            });
        }
        let verts: Vec<Point> = mesh.cell_vertices(c).copied().collect();
        self.map_to_simplex(&verts).map_err(|e| match e {
            Error::DegenerateCell { .. } | Error::DegenerateFace => Error::DegenerateCell { cell: c },
            e => e,
        })
    }

    /// Physical points and weights on the face with the given vertex indices.
    pub fn map_to_face(&self, mesh: &SimplicialMesh, face_vertices: &[usize]) -> Result<(Vec<Point>, Vec<f64>)> {
        if self.dim + 1 != mesh.dim() {
            return Err(Error::DimensionMismatch {
                expected: mesh.dim() - 1,
                found: self.dim,
            });
        }
        let verts: Vec<Point> = face_vertices.iter().map(|&v| *mesh.vertex(v)).collect();
        self.map_to_simplex(&verts).map_err(|e| match e {
            Error::DegenerateCell { .. } => Error::DegenerateFace,
            e => e,
        })
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and P_n'(z)
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Rule on the reference simplex of dimension `dim` exact for polynomials of
/// total degree `<= degree`.
pub fn simplex_rule(dim: usize, degree: usize) -> Result<QuadratureRule> {
    if !(1..=3).contains(&dim) || degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree { dim, degree });
    }
    // the collapsed direction carries dim-1 extra powers from the Jacobian
    let n = (degree + dim).div_ceil(2).max(1);
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            for i in 0..n {
                points.push(Point::new(x[i], 0.0, 0.0));
                weights.push(w[i]);
            }
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    let s = x[i];
                    points.push(Point::new(s, x[j] * (1.0 - s), 0.0));
                    weights.push(w[i] * w[j] * (1.0 - s));
                }
            }
        }
        _ => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let (s, t) = (x[i], x[j]);
                        points.push(Point::new(s, t * (1.0 - s), x[k] * (1.0 - s) * (1.0 - t)));
                        weights.push(w[i] * w[j] * w[k] * (1.0 - s) * (1.0 - s) * (1.0 - t));
                    }
                }
            }
        }
    }
    Ok(QuadratureRule {
        dim,
        points,
        weights,
        exact_degree: degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_faces, unit_cube_mesh};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Closed form: int over the reference simplex of x^a y^b z^c
    /// = a! b! c! / (a + b + c + dim)!.
    fn monomial_integral(dim: usize, e: [u32; 3]) -> f64 {
        factorial(e[0]) * factorial(e[1]) * factorial(e[2]) / factorial(e[0] + e[1] + e[2] + dim as u32)
    }

    fn apply(rule: &QuadratureRule, e: [u32; 3]) -> f64 {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p.x.powi(e[0] as i32) * p.y.powi(e[1] as i32) * p.z.powi(e[2] as i32))
            .sum()
    }

    #[test]
    fn weights_sum_to_reference_measure() {
        for degree in 0..=MAX_DEGREE {
            for (dim, measure) in [(1, 1.0), (2, 0.5), (3, 1.0 / 6.0)] {
                let r = simplex_rule(dim, degree).unwrap();
                assert_relative_eq!(r.weights.iter().sum::<f64>(), measure, epsilon = 1e-14);
                assert!(r.weights.iter().all(|&w| w > 0.0));
            }
        }
    }

    #[test]
    fn centroid_rule() {
        let r = simplex_rule(2, 1).unwrap();
        assert_relative_eq!(
            r.points.iter().zip(&r.weights).map(|(p, w)| w * (p.x + p.y)).sum::<f64>(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn named_monomials() {
        let r = simplex_rule(2, 5).unwrap();
        // 2! 3! / 7! = 12 / 5040
        assert_relative_eq!(apply(&r, [2, 3, 0]), 12.0 / 5040.0, max_relative = 1e-12);
        let r = simplex_rule(3, 4).unwrap();
        assert_relative_eq!(apply(&r, [4, 0, 0]), 24.0 / 5040.0, max_relative = 1e-12);
    }

    #[test]
    fn unsupported_degree() {
        assert_eq!(simplex_rule(2, 21), Err(Error::UnsupportedDegree { dim: 2, degree: 21 }));
        assert!(simplex_rule(4, 1).is_err());
    }

    #[test]
    fn exactness_sweep() {
        for dim in 1..=3 {
            for degree in 0..=12 {
                let rule = simplex_rule(dim, degree).unwrap();
                for a in 0..=degree as u32 {
                    for b in 0..=(degree as u32 - a) {
                        for c in 0..=(degree as u32 - a - b) {
                            let e = [a, if dim > 1 { b } else { 0 }, if dim > 2 { c } else { 0 }];
                            let exact = monomial_integral(dim, e);
                            assert_relative_eq!(apply(&rule, e), exact, max_relative = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn identity_and_translation() {
        let rule = simplex_rule(2, 4).unwrap();
        let reference = [Point::zeros(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let (pts, w) = rule.map_to_simplex(&reference).unwrap();
        assert_eq!(pts, rule.points);
        assert_eq!(w, rule.weights);
        let shift = Point::new(3.0, -2.0, 0.0);
        let moved: Vec<Point> = reference.iter().map(|p| p + shift).collect();
        let (pts2, w2) = rule.map_to_simplex(&moved).unwrap();
        assert_eq!(w2, rule.weights);
        for (p, q) in pts2.iter().zip(&rule.points) {
            assert_relative_eq!(*p, q + shift, epsilon = 1e-15);
        }
    }

    #[test]
    fn segment_and_triangle_faces() {
        let seg = simplex_rule(1, 3).unwrap();
        let (_, w) = seg
            .map_to_simplex(&[Point::new(1.0, 1.0, 0.0), Point::new(4.0, 5.0, 0.0)])
            .unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 5.0, epsilon = 1e-14);

        let mesh = unit_cube_mesh(2);
        let faces = build_faces(&mesh).unwrap();
        let tri = simplex_rule(2, 2).unwrap();
        for f in faces.interior.iter().take(10) {
            let (_, w) = tri.map_to_face(&mesh, &f.vertices).unwrap();
            assert_relative_eq!(w.iter().sum::<f64>(), f.measure, max_relative = 1e-13);
        }
        assert_eq!(
            tri.map_to_simplex(&[Point::zeros(), Point::new(1.0, 0.0, 0.0), Point::new(2.0, 0.0, 0.0)]),
            Err(Error::DegenerateFace)
        );
    }

    proptest! {
        #[test]
        fn triangle_weights_match_shoelace(coords in proptest::array::uniform6(-5.0f64..5.0)) {
            let p: Vec<Point> = coords.chunks(2).map(|c| Point::new(c[0], c[1], 0.0)).collect();
            let shoelace = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y)).abs();
            prop_assume!(shoelace > 1e-3);
            let rule = simplex_rule(2, 6).unwrap();
            let (_, w) = rule.map_to_simplex(&p).unwrap();
            prop_assert!((w.iter().sum::<f64>() - shoelace).abs() <= 1e-12 * shoelace.max(1.0));
        }

        #[test]
        fn tet_face_area_matches_cross_product(coords in proptest::array::uniform9(-3.0f64..3.0)) {
            let p: Vec<Point> = coords.chunks(3).map(|c| Point::new(c[0], c[1], c[2])).collect();
            let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
            prop_assume!(area > 1e-3);
            let (_, w) = simplex_rule(2, 3).unwrap().map_to_simplex(&p).unwrap();
            prop_assert!((w.iter().sum::<f64>() - area).abs() <= 1e-12 * area.max(1.0));
        }
    }
}
