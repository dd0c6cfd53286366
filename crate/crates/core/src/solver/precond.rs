use super::{sparse_dot, CsrMatrix};
use crate::error::{Error, Result};

/// Approximate inverse applied as `z = M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .enumerate()
            .map(|(i, d)| if d == 0.0 { Err(Error::ZeroPivot { row: i }) } else { Ok(1.0 / d) })
            .collect::<Result<_>>()?;
        Ok(Jacobi { inv_diag })
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

/// Strict lower part, diagonal and strict upper part of a square matrix,
/// stored separately so that a triangular sweep only streams its own half.
pub(crate) struct TriangularParts {
    lower: CsrMatrix,
    pub(crate) diag: Vec<f64>,
    upper: CsrMatrix,
}

impl TriangularParts {
    pub(crate) fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.n_cols() });
        }
        let pos = diagonal_positions(a)?;
        let (rp, ci, v) = (a.row_ptr(), a.col_idx(), a.values());
        let (mut lp, mut lc, mut lv) = (vec![0], Vec::new(), Vec::new());
        let (mut up, mut uc, mut uv) = (vec![0], Vec::new(), Vec::new());
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            if v[pos[i]] == 0.0 {
                return Err(Error::ZeroPivot { row: i });
            }
            diag.push(v[pos[i]]);
            lc.extend_from_slice(&ci[rp[i]..pos[i]]);
            lv.extend_from_slice(&v[rp[i]..pos[i]]);
            lp.push(lc.len());
            uc.extend_from_slice(&ci[pos[i] + 1..rp[i + 1]]);
            uv.extend_from_slice(&v[pos[i] + 1..rp[i + 1]]);
            up.push(uc.len());
        }
        Ok(TriangularParts {
            lower: CsrMatrix::new(n, n, lp, lc, lv)?,
            diag,
            upper: CsrMatrix::new(n, n, up, uc, uv)?,
        })
    }

    /// `y <- (D + L)^{-1} y`.
    pub(crate) fn forward_in_place(&self, y: &mut [f64]) {
        let (rp, ci, v) = (self.lower.row_ptr(), self.lower.col_idx(), self.lower.values());
        for i in 0..y.len() {
            let s = sparse_dot(&ci[rp[i]..rp[i + 1]], &v[rp[i]..rp[i + 1]], y);
            y[i] = (y[i] - s) / self.diag[i];
        }
    }

    /// `y <- (D + U)^{-1} y`.
    pub(crate) fn backward_in_place(&self, y: &mut [f64]) {
        let (rp, ci, v) = (self.upper.row_ptr(), self.upper.col_idx(), self.upper.values());
        for i in (0..y.len()).rev() {
            let s = sparse_dot(&ci[rp[i]..rp[i + 1]], &v[rp[i]..rp[i + 1]], y);
            y[i] = (y[i] - s) / self.diag[i];
        }
    }
}

/// Symmetric Gauss-Seidel: `M = (D + L) D^{-1} (D + U)` with `A = L + D + U`.
/// For a symmetric positive definite `A` the preconditioner is symmetric
/// positive definite as well, so it can be used with CG.
pub struct SymmetricGaussSeidel {
    parts: TriangularParts,
}

impl SymmetricGaussSeidel {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Ok(SymmetricGaussSeidel {
            parts: TriangularParts::new(a)?,
        })
    }
}

impl Preconditioner for SymmetricGaussSeidel {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.parts.forward_in_place(z);
        for (zi, d) in z.iter_mut().zip(&self.parts.diag) {
            *zi *= d;
        }
        self.parts.backward_in_place(z);
    }
}

fn diagonal_positions(a: &CsrMatrix) -> Result<Vec<usize>> {
    let rp = a.row_ptr();
    (0..a.n_rows())
        .map(|i| {
            a.col_idx()[rp[i]..rp[i + 1]]
                .binary_search(&i)
                .map(|k| rp[i] + k)
                .map_err(|_| Error::ZeroPivot { row: i })
        })
        .collect()
}

/// Incomplete LU factorization with the sparsity pattern of `A`.
/// `L` has a unit diagonal and shares storage with `U`.
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.n_cols() });
        }
        let row_ptr = a.row_ptr();
        let col_idx = a.col_idx();
        let mut vals = a.values().to_vec();
        let diag = diagonal_positions(a)?;
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let row = row_ptr[i]..row_ptr[i + 1];
            for p in row.clone() {
                pos[col_idx[p]] = p;
            }
            for p in row_ptr[i]..diag[i] {
                let k = col_idx[p];
                let pivot = vals[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::ZeroPivot { row: k });
                }
                let lik = vals[p] / pivot;
                vals[p] = lik;
                for q in diag[k] + 1..row_ptr[k + 1] {
                    let j = col_idx[q];
                    if pos[j] != usize::MAX {
                        vals[pos[j]] -= lik * vals[q];
                    }
                }
            }
            if vals[diag[i]] == 0.0 || !vals[diag[i]].is_finite() {
                return Err(Error::ZeroPivot { row: i });
            }
            for p in row {
                pos[col_idx[p]] = usize::MAX;
            }
        }
        let lu = CsrMatrix::new(n, n, row_ptr.to_vec(), col_idx.to_vec(), vals)?;
        Ok(Ilu0 { lu, diag })
    }

    /// Diagonal of the incomplete `U` factor.
    pub fn pivots(&self) -> Vec<f64> {
        self.diag.iter().map(|&p| self.lu.values()[p]).collect()
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.diag.len();
        let rp = self.lu.row_ptr();
        let ci = self.lu.col_idx();
        let v = self.lu.values();
        for i in 0..n {
            let mut s = r[i];
            for p in rp[i]..self.diag[i] {
                s -= v[p] * z[ci[p]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..rp[i + 1] {
                s -= v[p] * z[ci[p]];
            }
            z[i] = s / v[self.diag[i]];
        }
    }
}
