//! Longest-edge bisection with recursive conformity closure.
//!
//! Every marked cell is split at its longest edge. Any cell that then
//! contains a split edge (a hanging midpoint) is itself split at its own
//! longest edge, and so on until no hanging midpoints remain. Because
//! refinement edges follow a strict total order (length, then vertex pair),
//! the closure terminates.

use super::{edge_precedes, local_edges, Point, SimplicialMesh};
use crate::error::{Error, Result};
use std::collections::{HashMap, HashSet};

/// Closure sweeps allowed before the refinement is declared broken.
const MAX_SWEEPS: usize = 10_000;

struct Refiner {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<[usize; 4]>,
    midpoints: HashMap<(usize, usize), usize>,
}

impl Refiner {
    fn longest_edge(&self, c: usize) -> (usize, usize) {
        let cell = &self.cells[c];
        let mut best = None::<((usize, usize), f64)>;
        for &(i, j) in local_edges(self.dim) {
            let e = (cell[i].min(cell[j]), cell[i].max(cell[j]));
            let l = (self.vertices[e.0] - self.vertices[e.1]).norm_squared();
            best = match best {
                Some((b, lb)) if !edge_precedes(e, l, b, lb) => Some((b, lb)),
                _ => Some((e, l)),
            };
        }
        best.unwrap().0
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let vertices = &mut self.vertices;
        *self.midpoints.entry((a, b)).or_insert_with(|| {
            vertices.push(0.5 * (vertices[a] + vertices[b]));
            vertices.len() - 1
        })
    }

    /// Splits cell `c` in place; the second child is appended.
    fn split(&mut self, c: usize) {
        let (a, b) = self.longest_edge(c);
        let m = self.midpoint(a, b);
        let parent = self.cells[c];
        let mut first = parent;
        let mut second = parent;
        for k in 0..=self.dim {
            if parent[k] == b {
                first[k] = m;
            }
            if parent[k] == a {
                second[k] = m;
            }
        }
        self.cells[c] = first;
        self.cells.push(second);
    }

    fn is_hanging(&self, c: usize) -> bool {
        let cell = &self.cells[c];
        local_edges(self.dim).iter().any(|&(i, j)| {
            let e = (cell[i].min(cell[j]), cell[i].max(cell[j]));
            self.midpoints.contains_key(&e)
        })
    }
}

/// Bisects every marked cell at its longest edge and closes the refinement so
/// the result is conforming. With no marked cells the mesh is returned as is.
pub fn bisect(mesh: &SimplicialMesh, marked: &[usize]) -> Result<SimplicialMesh> {
    for &c in marked {
        if c >= mesh.num_cells() {
            return Err(Error::CellOutOfRange {
                cell: c,
                ncells: mesh.num_cells(),
            });
        }
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }
    let mut r = Refiner {
        dim: mesh.dim(),
        vertices: mesh.vertices().to_vec(),
        cells: mesh.raw_cells().to_vec(),
        midpoints: HashMap::new(),
    };
    let mut queue: Vec<usize> = marked.iter().copied().collect::<HashSet<_>>().into_iter().collect();
    queue.sort_unstable();
    let mut sweeps = 0;
    while !queue.is_empty() {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::BisectionDidNotTerminate { sweeps: MAX_SWEEPS });
        }
        for &c in &queue {
            r.split(c);
        }
        queue = (0..r.cells.len()).filter(|&c| r.is_hanging(c)).collect();
    }
    SimplicialMesh::from_parts(r.dim, r.vertices, r.cells)
}
