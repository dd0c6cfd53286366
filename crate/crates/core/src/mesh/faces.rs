//! Face topology: interior/boundary classification with normals and sizes.

use super::{Point, SimplicialMesh};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// A face shared by two cells. The cell with the smaller index is `plus`;
/// `normal` is the outward unit normal of the plus cell.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorFace {
    pub plus: usize,
    pub minus: usize,
    pub local_plus: usize,
    pub local_minus: usize,
    pub vertices: Vec<usize>,
    pub normal: Point,
    pub diameter: f64,
    pub measure: f64,
}

/// A face on the domain boundary with its outward unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFace {
    pub cell: usize,
    pub local_face: usize,
    pub vertices: Vec<usize>,
    pub normal: Point,
    pub diameter: f64,
    pub measure: f64,
}

/// A cell's view of one of its faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceRef {
    Interior { face: usize, is_plus: bool },
    Boundary { face: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceSet {
    pub interior: Vec<InteriorFace>,
    pub boundary: Vec<BoundaryFace>,
    /// For every cell, its faces in local order (face `i` is opposite local vertex `i`).
    pub cell_faces: Vec<Vec<FaceRef>>,
}

impl FaceSet {
    pub fn num_faces(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    /// Indices of the cells sharing a face with `c`, ascending.
    pub fn neighbors(&self, c: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.cell_faces[c]
            .iter()
            .filter_map(|f| match *f {
                FaceRef::Interior { face, is_plus } => {
                    let f = &self.interior[face];
                    Some(if is_plus { f.minus } else { f.plus })
                }
                FaceRef::Boundary { .. } => None,
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Vertices (local indices) of the face opposite local vertex `i`.
pub(crate) fn local_face(dim: usize, i: usize) -> Vec<usize> {
    (0..=dim).filter(|&j| j != i).collect()
}

/// Outward unit normal, diameter and measure of the face of cell `c`
/// opposite local vertex `i`.
pub(crate) fn face_geometry(mesh: &SimplicialMesh, c: usize, i: usize) -> Result<(Point, f64, f64)> {
    let cell = mesh.cell(c);
    let opposite = mesh.vertex(cell[i]);
    let pts: Vec<Point> = local_face(mesh.dim(), i).iter().map(|&j| *mesh.vertex(cell[j])).collect();
    let (raw, measure, diameter) = if mesh.dim() == 2 {
        let t = pts[1] - pts[0];
        (Point::new(t.y, -t.x, 0.0), t.norm(), t.norm())
    } else {
        let cr = (pts[1] - pts[0]).cross(&(pts[2] - pts[0]));
        let diam = [(0, 1), (1, 2), (0, 2)]
            .iter()
            .map(|&(a, b)| (pts[a] - pts[b]).norm())
            .fold(0.0, f64::max);
        (cr, 0.5 * cr.norm(), diam)
    };
    let len = raw.norm();
    if len == 0.0 || measure == 0.0 {
        return Err(Error::DegenerateFace);
    }
    let mut normal = raw / len;
    if normal.dot(&(opposite - pts[0])) > 0.0 {
        normal = -normal;
    }
    Ok((normal, diameter, measure))
}

/// Classifies every `(dim-1)`-simplex of a mesh as interior (shared by two
/// cells) or boundary (one cell). Fails on faces shared by more than two cells.
pub fn build_faces(mesh: &SimplicialMesh) -> Result<FaceSet> {
    let d = mesh.dim();
    let mut seen: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::with_capacity(mesh.num_cells() * (d + 1));
    let mut order = Vec::new();
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        for i in 0..=d {
            let mut key: Vec<usize> = local_face(d, i).iter().map(|&j| cell[j]).collect();
            key.sort_unstable();
            let entry = seen.entry(key.clone()).or_default();
            if entry.is_empty() {
                order.push(key);
            }
            entry.push((c, i));
        }
    }

    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    let mut cell_faces = vec![Vec::with_capacity(d + 1); mesh.num_cells()];
    let mut slots: Vec<Vec<Option<FaceRef>>> = vec![vec![None; d + 1]; mesh.num_cells()];
    for key in order {
        let owners = &seen[&key];
        match owners.as_slice() {
            &[(c, i)] => {
                let (normal, diameter, measure) = face_geometry(mesh, c, i)?;
                slots[c][i] = Some(FaceRef::Boundary { face: boundary.len() });
                boundary.push(BoundaryFace {
                    cell: c,
                    local_face: i,
                    vertices: key,
                    normal,
                    diameter,
                    measure,
                });
            }
            &[(c0, i0), (c1, i1)] => {
                // first occurrence has the smaller cell index
                let ((p, lp), (m, lm)) = if c0 < c1 { ((c0, i0), (c1, i1)) } else { ((c1, i1), (c0, i0)) };
                let (normal, diameter, measure) = face_geometry(mesh, p, lp)?;
                let face = interior.len();
                slots[p][lp] = Some(FaceRef::Interior { face, is_plus: true });
                slots[m][lm] = Some(FaceRef::Interior { face, is_plus: false });
                interior.push(InteriorFace {
                    plus: p,
                    minus: m,
                    local_plus: lp,
                    local_minus: lm,
                    vertices: key,
                    normal,
                    diameter,
                    measure,
                });
            }
            many => {
                return Err(Error::NonManifoldFace {
                    vertices: key,
                    count: many.len(),
                })
            }
        }
    }
    for (c, s) in slots.into_iter().enumerate() {
        cell_faces[c] = s.into_iter().map(|f| f.expect("every local face classified")).collect();
    }
    Ok(FaceSet {
        interior,
        boundary,
        cell_faces,
    })
}
