use super::{Point, SimplicialMesh};

const NONE: usize = usize::MAX;

/// Splits the grid square with lower-left vertex `v00` into two triangles
/// along the `v00`-`v11` diagonal.
fn push_square(cells: &mut Vec<[usize; 4]>, v00: usize, v10: usize, v01: usize, v11: usize) {
    cells.push([v00, v10, v11, NONE]);
    cells.push([v00, v11, v01, NONE]);
}

/// Same square cut along the `v10`-`v01` diagonal.
fn push_square_anti(cells: &mut Vec<[usize; 4]>, v00: usize, v10: usize, v01: usize, v11: usize) {
    cells.push([v00, v10, v01, NONE]);
    cells.push([v10, v11, v01, NONE]);
}

/// Structured triangulation of `(0,1)^2`: `n x n` squares, each cut along the
/// same diagonal. `2n^2` cells, `(n+1)^2` vertices.
pub fn unit_square_mesh(n: usize) -> SimplicialMesh {
    assert!(n >= 1, "need at least one subdivision");
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 * h, j as f64 * h, 0.0));
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            push_square(&mut cells, idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
        }
    }
    SimplicialMesh::from_parts(2, vertices, cells).expect("structured mesh is valid")
}

/// Structured tetrahedralization of `(0,1)^3`: `n^3` cubes, each cut into the
/// six tetrahedra of the Kuhn split along the main diagonal. `6n^3` cells.
pub fn unit_cube_mesh(n: usize) -> SimplicialMesh {
    assert!(n >= 1, "need at least one subdivision");
    let idx = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut tet = [idx(i, j, k), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        tet[step + 1] = idx(c[0], c[1], c[2]);
                    }
                    cells.push(tet);
                }
            }
        }
    }
    SimplicialMesh::from_parts(3, vertices, cells).expect("structured mesh is valid")
}

/// Structured triangulation of the L-shaped domain
/// `(-1,1)^2 \ [0,1) x (-1,0]` with `h = 1/n` on each unit block. The
/// reentrant corner is the vertex at the origin. Every diagonal points
/// towards the corner, so the mesh is symmetric about the line `y = -x`.
pub fn l_shaped_mesh(n: usize) -> SimplicialMesh {
    assert!(n >= 1, "need at least one subdivision");
    let side = 2 * n;
    let h = 1.0 / n as f64;
    // grid square (i, j) covers [-1 + i h, -1 + (i+1) h] x [-1 + j h, ...]
    let removed = |i: usize, j: usize| i >= n && j < n;
    let mut id = vec![usize::MAX; (side + 1) * (side + 1)];
    let mut vertices = Vec::new();
    let mut vertex = |i: usize, j: usize, vertices: &mut Vec<Point>| -> usize {
        let slot = &mut id[j * (side + 1) + i];
        if *slot == usize::MAX {
            *slot = vertices.len();
            vertices.push(Point::new(-1.0 + i as f64 * h, -1.0 + j as f64 * h, 0.0));
        }
        *slot
    };
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..side {
        for i in 0..side {
            if removed(i, j) {
                continue;
            }
            let v00 = vertex(i, j, &mut vertices);
            let v10 = vertex(i + 1, j, &mut vertices);
            let v01 = vertex(i, j + 1, &mut vertices);
            let v11 = vertex(i + 1, j + 1, &mut vertices);
            if i < n && j >= n {
                push_square_anti(&mut cells, v00, v10, v01, v11);
            } else {
                push_square(&mut cells, v00, v10, v01, v11);
            }
        }
    }
    SimplicialMesh::from_parts(2, vertices, cells).expect("structured mesh is valid")
}
