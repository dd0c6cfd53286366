use super::precond::TriangularParts;
use super::{dot, norm, CsrMatrix, Preconditioner};
use crate::error::{Error, Result};

/// Restarts allowed when the recursive residual disagrees with the true one
/// or the iteration breaks down.
const MAX_RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// True relative residual `|b - Ax| / |b|` of the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
    pub breakdown: bool,
}

fn check_dims(a: &CsrMatrix, b: &[f64]) -> Result<()> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), found: a.n_cols() });
    }
    if b.len() != a.n_rows() {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), found: b.len() });
    }
    Ok(())
}

fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    a.spmv_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

fn zero_rhs(n: usize) -> (Vec<f64>, SolveStats) {
    (
        vec![0.0; n],
        SolveStats {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            breakdown: false,
        },
    )
}

/// Right-preconditioned BiCGstab started from `x0 = 0`.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    m: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    check_dims(a, b)?;
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(zero_rhs(n));
    }
    let target = tol * bnorm;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut iterations = 0;
    let mut restarts = 0;
    let mut breakdown = false;

    'outer: loop {
        let rhat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        p.iter_mut().for_each(|e| *e = 0.0);
        v.iter_mut().for_each(|e| *e = 0.0);
        let scale = norm(&r);
        let mut broke = false;
        while iterations < max_iter {
            iterations += 1;
            let rho_new = dot(&rhat, &r);
            if rho_new.abs() <= 1e-300 || rho_new.abs() < 1e-30 * scale * scale {
                broke = true;
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            m.apply(&p, &mut phat);
            a.spmv_into(&phat, &mut v);
            let rv = dot(&rhat, &v);
            if rv == 0.0 || !rv.is_finite() {
                broke = true;
                break;
            }
            alpha = rho / rv;
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            if norm(&s) <= target {
                for i in 0..n {
                    x[i] += alpha * phat[i];
                }
                break;
            }
            m.apply(&s, &mut shat);
            a.spmv_into(&shat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                broke = true;
                break;
            }
            omega = dot(&t, &s) / tt;
            for i in 0..n {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] = s[i] - omega * t[i];
            }
            if norm(&r) <= target {
                break;
            }
            if omega == 0.0 {
                broke = true;
                break;
            }
        }
        breakdown |= broke;
        let res = true_residual(a, b, &x, &mut r);
        if res <= target || iterations >= max_iter || restarts >= MAX_RESTARTS || !res.is_finite() {
            let stats = SolveStats {
                iterations,
                relative_residual: res / bnorm,
                converged: res <= target,
                breakdown,
            };
            break 'outer Ok((x, stats));
        }
        restarts += 1;
    }
}

/// Preconditioned conjugate gradients started from `x0 = 0`. The matrix and
/// preconditioner must be symmetric positive definite.
pub fn cg(
    a: &CsrMatrix,
    b: &[f64],
    m: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    check_dims(a, b)?;
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(zero_rhs(n));
    }
    let target = tol * bnorm;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;
    let mut restarts = 0;
    let mut breakdown = false;
    loop {
        m.apply(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            iterations += 1;
            a.spmv_into(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 || !pq.is_finite() {
                breakdown = true;
                break;
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            if norm(&r) <= target {
                break;
            }
            m.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let res = true_residual(a, b, &x, &mut r);
        if res <= target || iterations >= max_iter || restarts >= MAX_RESTARTS || breakdown || !res.is_finite() {
            let stats = SolveStats {
                iterations,
                relative_residual: res / bnorm,
                converged: res <= target,
                breakdown,
            };
            return Ok((x, stats));
        }
        restarts += 1;
    }
}

/// CG preconditioned by symmetric Gauss-Seidel, in the split form of
/// Eisenstat: with `A = F + B - D`, `F = D + L`, `B = D + L^T`, CG runs on
/// `D^{1/2} F^{-1} A B^{-1} D^{1/2}`, whose action costs one forward and one
/// backward sweep instead of a product with `A` plus two sweeps. The iterates
/// coincide with those of ordinary PCG. `A` must be symmetric positive definite.
pub fn cg_sgs(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    check_dims(a, b)?;
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(zero_rhs(n));
    }
    let split = EisenstatSplit::new(a)?;
    let mut rhat = split.transform_rhs(b);
    let target = tol * bnorm;
    let mut xhat = vec![0.0; n];
    let mut p = rhat.clone();
    let mut q = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut rr = dot(&rhat, &rhat);
    // the transformed residual is only a proxy; tightened on demand
    let mut proxy_target = tol * norm(&rhat);
    let mut iterations = 0;
    let mut breakdown = false;
    loop {
        while iterations < max_iter && rr.sqrt() > proxy_target {
            iterations += 1;
            split.apply(&p, &mut q, &mut w);
            let pq = dot(&p, &q);
            if pq <= 0.0 || !pq.is_finite() {
                breakdown = true;
                break;
            }
            let alpha = rr / pq;
            for i in 0..n {
                xhat[i] += alpha * p[i];
                rhat[i] -= alpha * q[i];
            }
            let rr_new = dot(&rhat, &rhat);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = rhat[i] + beta * p[i];
            }
        }
        split.recover(&xhat, &mut x);
        let res = true_residual(a, b, &x, &mut r);
        if res <= target || iterations >= max_iter || breakdown || !res.is_finite() || proxy_target < 1e-3 * f64::EPSILON * bnorm {
            let stats = SolveStats {
                iterations,
                relative_residual: res / bnorm,
                converged: res <= target,
                breakdown,
            };
            return Ok((x, stats));
        }
        proxy_target *= 0.5 * target / res;
    }
}

struct EisenstatSplit {
    parts: TriangularParts,
    sqrt_d: Vec<f64>,
}

impl EisenstatSplit {
    fn new(a: &CsrMatrix) -> Result<Self> {
        let parts = TriangularParts::new(a)?;
        if let Some(i) = parts.diag.iter().position(|&d| d <= 0.0) {
            return Err(Error::ZeroPivot { row: i });
        }
        let sqrt_d = parts.diag.iter().map(|v| v.sqrt()).collect();
        Ok(EisenstatSplit { parts, sqrt_d })
    }

    /// `y = D^{1/2} F^{-1} b`.
    fn transform_rhs(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        self.parts.forward_in_place(&mut y);
        for (v, s) in y.iter_mut().zip(&self.sqrt_d) {
            *v *= s;
        }
        y
    }

    /// `q = D^{1/2} (w + F^{-1} (D^{1/2} p - D w))` with `w = B^{-1} D^{1/2} p`.
    fn apply(&self, p: &[f64], q: &mut [f64], w: &mut [f64]) {
        for i in 0..p.len() {
            w[i] = self.sqrt_d[i] * p[i];
        }
        self.parts.backward_in_place(w);
        for i in 0..p.len() {
            q[i] = self.sqrt_d[i] * p[i] - self.parts.diag[i] * w[i];
        }
        self.parts.forward_in_place(q);
        for i in 0..p.len() {
            q[i] = self.sqrt_d[i] * (q[i] + w[i]);
        }
    }

    /// `x = B^{-1} D^{1/2} xhat`.
    fn recover(&self, xhat: &[f64], x: &mut [f64]) {
        for i in 0..x.len() {
            x[i] = self.sqrt_d[i] * xhat[i];
        }
        self.parts.backward_in_place(x);
    }
}
