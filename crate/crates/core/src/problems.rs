//! Manufactured solutions for the first-order Maxwell system
//!
//! ```text
//! curl p - k u = f / k,   curl u - k p = 0   in the domain,
//! n x u = n x u_exact                        on the boundary,
//! ```
//!
//! so that `p = curl u / k` and `f = curl curl u - k^2 u`. Vectors follow the
//! embedding of [`crate::femspace`]: 2D scalars are stored in `z`.

use crate::error::{Error, Result};
use crate::mesh::Point;
use nalgebra::Vector3;
use std::f64::consts::PI;

/// Exact data of a time-harmonic Maxwell problem.
pub trait MaxwellProblem: Sync {
    fn dim(&self) -> usize;
    fn wave_number(&self) -> f64;
    fn u(&self, x: &Point) -> Vector3<f64>;
    fn curl_u(&self, x: &Point) -> Vector3<f64>;
    fn curl_p(&self, x: &Point) -> Vector3<f64>;
    /// Source `f` of the second-order equation.
    fn source(&self, x: &Point) -> Vector3<f64>;

    fn p(&self, x: &Point) -> Vector3<f64> {
        self.curl_u(x) / self.wave_number()
    }

    /// Boundary datum `n x u_exact` for the outward normal `n`.
    fn boundary_trace(&self, x: &Point, n: &Vector3<f64>) -> Vector3<f64> {
        n.cross(&self.u(x))
    }

    /// Points where the exact fields are not defined.
    fn singular_points(&self) -> &[Point] {
        &[]
    }
}

/// Rejects evaluation exactly at a singular point of `problem`.
pub fn check_point(problem: &dyn MaxwellProblem, x: &Point) -> Result<()> {
    if problem.singular_points().iter().any(|s| s == x) {
        return Err(Error::SingularPoint { point: [x.x, x.y, x.z] });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// `u = (sin ky, sin kx)` on the unit square.
    Smooth2d,
    /// `u = (sin ky sin kz, sin kx sin kz, sin kx sin ky)` on the unit cube.
    Smooth3d,
    /// `u = grad((kr)^alpha sin(alpha theta)) + (sin ky, sin kx)` on the L-shape.
    LShape { alpha: f64 },
    /// `u = grad(|x|^alpha)` on the unit cube.
    Singular3d { alpha: f64 },
}

/// One of the reference problems, with its fields in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedProblem {
    pub kind: ProblemKind,
    pub k: f64,
    singular: Vec<Point>,
}

/// Pointwise exact data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub u: Vector3<f64>,
    pub p: Vector3<f64>,
    pub curl_u: Vector3<f64>,
    pub curl_p: Vector3<f64>,
    pub f: Vector3<f64>,
}

fn positive_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("wave number must be positive, got {k}")))
    }
}

impl ManufacturedProblem {
    pub fn example1(k: f64) -> Result<Self> {
        positive_k(k)?;
        Ok(Self::build(ProblemKind::Smooth2d, k))
    }

    pub fn example2(k: f64) -> Result<Self> {
        positive_k(k)?;
        Ok(Self::build(ProblemKind::Smooth3d, k))
    }

    pub fn example3(k: f64, alpha: f64) -> Result<Self> {
        positive_k(k)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self::build(ProblemKind::LShape { alpha }, k))
    }

    /// The 3D corner singularity, always with `k = 1`.
    pub fn example4(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (1, 2), got {alpha}")));
        }
        Ok(Self::build(ProblemKind::Singular3d { alpha }, 1.0))
    }

    fn build(kind: ProblemKind, k: f64) -> Self {
        let singular = match kind {
            ProblemKind::LShape { .. } | ProblemKind::Singular3d { .. } => vec![Point::zeros()],
            _ => Vec::new(),
        };
        ManufacturedProblem { kind, k, singular }
    }

    pub fn regularity_note(&self) -> String {
        match self.kind {
            ProblemKind::Smooth2d | ProblemKind::Smooth3d => "analytic".into(),
            ProblemKind::LShape { alpha } => format!("u in H^(s) for s < {alpha} (reentrant corner at the origin)"),
            ProblemKind::Singular3d { alpha } => {
                format!("u in H^(s) for s < {} (vertex singularity at the origin)", alpha - 0.5)
            }
        }
    }

    /// All exact data at `x`, rejecting singular points.
    pub fn evaluate(&self, x: &Point) -> Result<FieldSample> {
        check_point(self, x)?;
        Ok(FieldSample {
            u: self.u(x),
            p: self.p(x),
            curl_u: self.curl_u(x),
            curl_p: self.curl_p(x),
            f: self.source(x),
        })
    }

    /// Polar angle in `[0, 2 pi)`, so the L-shape is covered by `[0, 3 pi / 2]`.
    fn polar(x: &Point) -> (f64, f64) {
        let r = x.x.hypot(x.y);
        let mut theta = x.y.atan2(x.x);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        (r, theta)
    }

    /// `grad((kr)^alpha sin(alpha theta))`.
    fn corner_gradient(&self, alpha: f64, x: &Point) -> Vector3<f64> {
        let (r, theta) = Self::polar(x);
        let s = alpha * self.k.powf(alpha) * r.powf(alpha - 1.0);
        let phi = (alpha - 1.0) * theta;
        Vector3::new(s * phi.sin(), s * phi.cos(), 0.0)
    }

    fn smooth2d_u(&self, x: &Point) -> Vector3<f64> {
        let k = self.k;
        Vector3::new((k * x.y).sin(), (k * x.x).sin(), 0.0)
    }

    fn smooth3d_u(&self, x: &Point) -> Vector3<f64> {
        let k = self.k;
        let (sx, sy, sz) = ((k * x.x).sin(), (k * x.y).sin(), (k * x.z).sin());
        Vector3::new(sy * sz, sx * sz, sx * sy)
    }
}

impl MaxwellProblem for ManufacturedProblem {
    fn dim(&self) -> usize {
        match self.kind {
            ProblemKind::Smooth2d | ProblemKind::LShape { .. } => 2,
            ProblemKind::Smooth3d | ProblemKind::Singular3d { .. } => 3,
        }
    }

    fn wave_number(&self) -> f64 {
        self.k
    }

    fn u(&self, x: &Point) -> Vector3<f64> {
        match self.kind {
            ProblemKind::Smooth2d => self.smooth2d_u(x),
            ProblemKind::Smooth3d => self.smooth3d_u(x),
            ProblemKind::LShape { alpha } => self.corner_gradient(alpha, x) + self.smooth2d_u(x),
            ProblemKind::Singular3d { alpha } => alpha * x.norm().powf(alpha - 2.0) * x,
        }
    }

    fn curl_u(&self, x: &Point) -> Vector3<f64> {
        let k = self.k;
        match self.kind {
            // the gradient part of the L-shape field is curl-free
            ProblemKind::Smooth2d | ProblemKind::LShape { .. } => {
                Vector3::new(0.0, 0.0, k * (k * x.x).cos() - k * (k * x.y).cos())
            }
            ProblemKind::Smooth3d => {
                let (sx, sy, sz) = ((k * x.x).sin(), (k * x.y).sin(), (k * x.z).sin());
                let (cx, cy, cz) = ((k * x.x).cos(), (k * x.y).cos(), (k * x.z).cos());
                k * Vector3::new(sx * (cy - cz), sy * (cz - cx), sz * (cx - cy))
            }
            ProblemKind::Singular3d { .. } => Vector3::zeros(),
        }
    }

    fn curl_p(&self, x: &Point) -> Vector3<f64> {
        match self.kind {
            ProblemKind::Smooth2d | ProblemKind::LShape { .. } => self.k * self.smooth2d_u(x),
            // curl curl u = 2 k^2 u for the divergence-free 3D field
            ProblemKind::Smooth3d => 2.0 * self.k * self.smooth3d_u(x),
            ProblemKind::Singular3d { .. } => Vector3::zeros(),
        }
    }

    fn source(&self, x: &Point) -> Vector3<f64> {
        let k2 = self.k * self.k;
        match self.kind {
            ProblemKind::Smooth2d => Vector3::zeros(),
            ProblemKind::Smooth3d => k2 * self.smooth3d_u(x),
            ProblemKind::LShape { alpha } => -k2 * self.corner_gradient(alpha, x),
            ProblemKind::Singular3d { .. } => -k2 * self.u(x),
        }
    }

    fn singular_points(&self) -> &[Point] {
        &self.singular
    }
}
