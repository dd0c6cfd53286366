//! Conforming simplicial partitions in two and three dimensions.
//!
//! A [`SimplicialMesh`] stores vertex coordinates and cell connectivity. Two
//! dimensional meshes are embedded in the `z = 0` plane, so every point is a
//! [`Point`] with three components. Cells are positively oriented: the
//! constructor swaps two vertices of any cell whose signed volume is negative.
//!
//! Face topology (interior/boundary classification, normals, diameters) lives
//! in [`faces`]; adaptive longest-edge bisection in [`bisect`].

pub mod bisect;
pub mod faces;
mod generate;
mod io;

pub use bisect::bisect;
pub use faces::{build_faces, BoundaryFace, FaceRef, FaceSet, InteriorFace};
pub use generate::{l_shaped_mesh, unit_cube_mesh, unit_square_mesh};

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use std::collections::HashMap;

/// A point (or vector) in physical space. 2D data lives in the `xy` plane.
pub type Point = Vector3<f64>;

/// Local edges of a triangle / tetrahedron as pairs of local vertex indices.
pub(crate) const TRI_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];
pub(crate) const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub(crate) fn local_edges(dim: usize) -> &'static [(usize, usize)] {
    if dim == 2 {
        &TRI_EDGES
    } else {
        &TET_EDGES
    }
}

/// Conforming triangulation (`dim == 2`) or tetrahedralization (`dim == 3`).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<[usize; 4]>,
    refinement_edges: Vec<u8>,
}

impl SimplicialMesh {
    /// Builds a mesh from raw data, normalizing every cell to positive orientation.
    ///
    /// Fails on a wrong dimension, an out-of-range vertex index, repeated
    /// vertices within a cell, or a cell of zero volume.
    pub fn new(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidMesh(format!("unsupported dimension {dim}")));
        }
        if dim == 2 && vertices.iter().any(|v| v.z != 0.0) {
            return Err(Error::InvalidMesh("2d vertices must have z = 0".into()));
        }
        let mut packed = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.len(),
                    dim + 1
                )));
            }
            let mut arr = [usize::MAX; 4];
            for (slot, &v) in arr.iter_mut().zip(cell) {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!("cell {c} references vertex {v}")));
                }
                *slot = v;
            }
            packed.push(arr);
        }
        let mut mesh = SimplicialMesh {
            dim,
            vertices,
            cells: packed,
            refinement_edges: Vec::new(),
        };
        mesh.normalize()?;
        Ok(mesh)
    }

    pub(crate) fn from_parts(dim: usize, vertices: Vec<Point>, cells: Vec<[usize; 4]>) -> Result<Self> {
        let mut mesh = SimplicialMesh {
            dim,
            vertices,
            cells,
            refinement_edges: Vec::new(),
        };
        mesh.normalize()?;
        Ok(mesh)
    }

    fn normalize(&mut self) -> Result<()> {
        let d = self.dim;
        for c in 0..self.cells.len() {
            let vol = self.signed_volume(c);
            if vol == 0.0 || !vol.is_finite() {
                return Err(Error::DegenerateCell { cell: c });
            }
            if vol < 0.0 {
                self.cells[c].swap(d - 1, d);
            }
        }
        self.refinement_edges = (0..self.cells.len())
            .map(|c| {
                let (a, b) = self.longest_edge(c);
                let cell = self.cell(c);
                let la = cell.iter().position(|&v| v == a).unwrap();
                let lb = cell.iter().position(|&v| v == b).unwrap();
                let (i, j) = (la.min(lb), la.max(lb));
                local_edges(d).iter().position(|&e| e == (i, j)).unwrap() as u8
            })
            .collect();
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    /// Vertex indices of cell `c` (`dim + 1` entries).
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.dim + 1]
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        let n = self.dim + 1;
        self.cells.iter().map(move |c| &c[..n])
    }

    pub(crate) fn raw_cells(&self) -> &[[usize; 4]] {
        &self.cells
    }

    /// Local index (into the triangle/tetrahedron edge table) of each cell's
    /// refinement edge, i.e. the edge bisection would split.
    pub fn refinement_edges(&self) -> &[u8] {
        &self.refinement_edges
    }

    pub fn cell_vertices(&self, c: usize) -> impl Iterator<Item = &Point> + '_ {
        self.cell(c).iter().map(move |&v| &self.vertices[v])
    }

    pub fn signed_volume(&self, c: usize) -> f64 {
        let cell = self.cells[c];
        let p0 = self.vertices[cell[0]];
        let e1 = self.vertices[cell[1]] - p0;
        let e2 = self.vertices[cell[2]] - p0;
        if self.dim == 2 {
            0.5 * (e1.x * e2.y - e1.y * e2.x)
        } else {
            let e3 = self.vertices[cell[3]] - p0;
            e1.dot(&e2.cross(&e3)) / 6.0
        }
    }

    /// Area (2D) or volume (3D) of cell `c`.
    pub fn cell_measure(&self, c: usize) -> f64 {
        self.signed_volume(c).abs()
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_measure(c)).sum()
    }

    /// Cell diameter `h_K`: the longest edge.
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        local_edges(self.dim)
            .iter()
            .map(|&(i, j)| (self.vertices[cell[i]] - self.vertices[cell[j]]).norm())
            .fold(0.0, f64::max)
    }

    /// Mesh size `h = max_K h_K`.
    pub fn mesh_size(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Diameter of the largest ball inscribed in cell `c`.
    pub fn inscribed_diameter(&self, c: usize) -> f64 {
        let pts: Vec<Point> = self.cell_vertices(c).copied().collect();
        let boundary: f64 = if self.dim == 2 {
            TRI_EDGES.iter().map(|&(i, j)| (pts[i] - pts[j]).norm()).sum()
        } else {
            (0..4)
                .map(|skip| {
                    let f: Vec<&Point> = (0..4).filter(|&i| i != skip).map(|i| &pts[i]).collect();
                    0.5 * (f[1] - f[0]).cross(&(f[2] - f[0])).norm()
                })
                .sum()
        };
        2.0 * self.dim as f64 * self.cell_measure(c) / boundary
    }

    /// Shape-regularity ratio `h_K / rho_K`.
    pub fn shape_ratio(&self, c: usize) -> f64 {
        self.cell_diameter(c) / self.inscribed_diameter(c)
    }

    /// Smallest interior angle (radians) among all triangles of a 2D mesh.
    pub fn min_angle(&self) -> f64 {
        assert_eq!(self.dim, 2, "min_angle is defined for triangles");
        let mut min = f64::INFINITY;
        for c in 0..self.num_cells() {
            let p: Vec<Point> = self.cell_vertices(c).copied().collect();
            for i in 0..3 {
                let a = p[(i + 1) % 3] - p[i];
                let b = p[(i + 2) % 3] - p[i];
                min = min.min((a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos());
            }
        }
        min
    }

    pub fn centroid(&self, c: usize) -> Point {
        let n = (self.dim + 1) as f64;
        self.cell_vertices(c).fold(Point::zeros(), |acc, p| acc + p) / n
    }

    /// The longest edge of cell `c` as a global vertex pair `(min, max)`.
    ///
    /// Lengths that agree to a relative `1e-12` are ties, resolved by the
    /// lexicographically smallest `(min vertex, max vertex)` pair.
    pub fn longest_edge(&self, c: usize) -> (usize, usize) {
        let cell = self.cell(c);
        let mut best: Option<((usize, usize), f64)> = None;
        for &(i, j) in local_edges(self.dim) {
            let (a, b) = (cell[i].min(cell[j]), cell[i].max(cell[j]));
            let len2 = (self.vertices[a] - self.vertices[b]).norm_squared();
            best = match best {
                None => Some(((a, b), len2)),
                Some((e, l)) => {
                    if edge_precedes((a, b), len2, e, l) {
                        Some(((a, b), len2))
                    } else {
                        Some((e, l))
                    }
                }
            };
        }
        best.unwrap().0
    }

    /// Affine map data for cell `c`.
    pub fn geometry(&self, c: usize) -> Result<CellGeometry> {
        CellGeometry::new(self, c)
    }

    /// Midpoint-subdivision of every cell (red refinement): triangles split
    /// into 4, tetrahedra into 8 with the interior octahedron cut along the
    /// diagonal joining the midpoints of local edges (0,2) and (1,3).
    pub fn uniform_refine(&self) -> SimplicialMesh {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                vertices.push(0.5 * (vertices[a] + vertices[b]));
                vertices.len() - 1
            })
        };
        let mut cells = Vec::with_capacity(self.cells.len() * if self.dim == 2 { 4 } else { 8 });
        for cell in &self.cells {
            if self.dim == 2 {
                let [v0, v1, v2, _] = *cell;
                let m01 = mid(v0, v1, &mut vertices);
                let m12 = mid(v1, v2, &mut vertices);
                let m02 = mid(v0, v2, &mut vertices);
                cells.push([v0, m01, m02, usize::MAX]);
                cells.push([m01, v1, m12, usize::MAX]);
                cells.push([m02, m12, v2, usize::MAX]);
                cells.push([m01, m12, m02, usize::MAX]);
            } else {
                let [v0, v1, v2, v3] = *cell;
                let m01 = mid(v0, v1, &mut vertices);
                let m02 = mid(v0, v2, &mut vertices);
                let m03 = mid(v0, v3, &mut vertices);
                let m12 = mid(v1, v2, &mut vertices);
                let m13 = mid(v1, v3, &mut vertices);
                let m23 = mid(v2, v3, &mut vertices);
                cells.push([v0, m01, m02, m03]);
                cells.push([m01, v1, m12, m13]);
                cells.push([m02, m12, v2, m23]);
                cells.push([m03, m13, m23, v3]);
                // octahedron around the m02-m13 diagonal
                cells.push([m02, m13, m01, m12]);
                cells.push([m02, m13, m12, m23]);
                cells.push([m02, m13, m23, m03]);
                cells.push([m02, m13, m03, m01]);
            }
        }
        SimplicialMesh::from_parts(self.dim, vertices, cells)
            .expect("midpoint subdivision of a valid mesh is valid")
    }
}

/// Strict total order used to pick refinement edges: longer first, then the
/// lexicographically smaller vertex pair.
pub(crate) fn edge_precedes(a: (usize, usize), len_a: f64, b: (usize, usize), len_b: f64) -> bool {
    let tol = 1e-12 * len_a.max(len_b);
    if (len_a - len_b).abs() > tol {
        len_a > len_b
    } else {
        a < b
    }
}

/// Affine map `x = origin + J xi` from the reference simplex onto a cell.
///
/// For 2D cells the Jacobian is padded with `J[(2, 2)] = 1`, so the inverse
/// leaves the `z` component untouched.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: Point,
    pub jacobian: Matrix3<f64>,
    pub inverse: Matrix3<f64>,
    /// `|det J|`; the cell measure is this divided by `dim!`.
    pub det: f64,
}

impl CellGeometry {
    pub fn new(mesh: &SimplicialMesh, c: usize) -> Result<Self> {
        if c >= mesh.num_cells() {
            return Err(Error::CellOutOfRange {
                cell: c,
                ncells: mesh.num_cells(),
            });
        }
        let cell = mesh.cell(c);
        let origin = mesh.vertices[cell[0]];
        let mut jacobian = Matrix3::identity();
        for k in 0..mesh.dim {
            jacobian.set_column(k, &(mesh.vertices[cell[k + 1]] - origin));
        }
        let det = jacobian.determinant();
        let scale = jacobian.norm().powi(mesh.dim as i32);
        if det.abs() <= 1e-14 * scale {
            return Err(Error::DegenerateCell { cell: c });
        }
        let inverse = jacobian.try_inverse().ok_or(Error::DegenerateCell { cell: c })?;
        Ok(CellGeometry {
            origin,
            jacobian,
            inverse,
            det: det.abs(),
        })
    }

    pub fn to_physical(&self, xi: &Point) -> Point {
        self.origin + self.jacobian * xi
    }

    pub fn to_reference(&self, x: &Point) -> Point {
        self.inverse * (x - self.origin)
    }

    /// Maps a reference gradient to a physical gradient (`J^{-T} g`).
    pub fn push_gradient(&self, g: &Vector3<f64>) -> Vector3<f64> {
        self.inverse.tr_mul(g)
    }
}
