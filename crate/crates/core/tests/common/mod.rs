#![allow(dead_code)]

use dls_maxwell::{MaxwellProblem, Point};
use nalgebra::Vector3;

/// `u = (y^2, x)` on a 2D domain; `u` is quadratic, `p` linear.
pub struct Quadratic2d {
    pub k: f64,
}

impl MaxwellProblem for Quadratic2d {
    fn dim(&self) -> usize {
        2
    }
    fn wave_number(&self) -> f64 {
        self.k
    }
    fn u(&self, x: &Point) -> Vector3<f64> {
        Vector3::new(x.y * x.y, x.x, 0.0)
    }
    fn curl_u(&self, x: &Point) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, 1.0 - 2.0 * x.y)
    }
    fn curl_p(&self, _x: &Point) -> Vector3<f64> {
        Vector3::new(-2.0 / self.k, 0.0, 0.0)
    }
    fn source(&self, x: &Point) -> Vector3<f64> {
        self.k * (self.curl_p(x) - self.k * self.u(x))
    }
}

/// `u = (yz, x^2, 0)` in 3D.
pub struct Quadratic3d {
    pub k: f64,
}

impl MaxwellProblem for Quadratic3d {
    fn dim(&self) -> usize {
        3
    }
    fn wave_number(&self) -> f64 {
        self.k
    }
    fn u(&self, x: &Point) -> Vector3<f64> {
        Vector3::new(x.y * x.z, x.x * x.x, 0.0)
    }
    fn curl_u(&self, x: &Point) -> Vector3<f64> {
        Vector3::new(0.0, x.y, 2.0 * x.x - x.z)
    }
    fn curl_p(&self, _x: &Point) -> Vector3<f64> {
        Vector3::new(0.0, -2.0 / self.k, 0.0)
    }
    fn source(&self, x: &Point) -> Vector3<f64> {
        self.k * (self.curl_p(x) - self.k * self.u(x))
    }
}

/// Central-difference curl of `f`, using only the in-plane derivatives in 2D.
pub fn fd_curl(dim: usize, f: impl Fn(&Point) -> Vector3<f64>, x: &Point, h: f64) -> Vector3<f64> {
    let d = |axis: usize| {
        let mut e = Vector3::zeros();
        e[axis] = h;
        (f(&(x + e)) - f(&(x - e))) / (2.0 * h)
    };
    let dx = d(0);
    let dy = d(1);
    let dz = if dim == 3 { d(2) } else { Vector3::zeros() };
    Vector3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x)
}
