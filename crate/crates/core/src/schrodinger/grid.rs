use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-13;
const INVERSE_TOL: f64 = 1e-12;

/// Non-uniform grid spacing `d(x) = 1 / (sqrt(B) ((1-x) x)^(1/4))`.
pub fn grid_spacing(x: f64, b: f64) -> Result<f64> {
    if b <= 0.0 || !b.is_finite() {
        return Err(Error::domain(format!("grid spacing needs B > 0, got {b}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("grid spacing is singular outside (0, 1), got x = {x}")));
    }
    Ok(1.0 / (b.sqrt() * ((1.0 - x) * x).powf(0.25)))
}

/// Interval coordinate `D(x) = int_0^x d(t) dt`, its total length `L = D(1)`
/// and its inverse.
///
/// The `t^(-1/4)` endpoint singularities are removed with `t = s^4`: on
/// `[0, 1/2]`, `D(s^4) = int_0^s 4u^2 / (sqrt(B) (1-u^4)^(1/4)) du`, which
/// is smooth. The right half follows from `D(x) = L - D(1-x)`.
#[derive(Debug, Clone, Serialize)]
pub struct GridMap {
    b: f64,
    length: f64,
}

impl GridMap {
    pub fn new(b: f64) -> Result<Self> {
        if b <= 0.0 || !b.is_finite() {
            return Err(Error::domain(format!("grid map needs B > 0, got {b}")));
        }
        let half = Self::left_integral(b, 0.5f64.powf(0.25))?;
        Ok(Self { b, length: 2.0 * half })
    }

    pub fn field(&self) -> f64 {
        self.b
    }

    /// Total length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self, x: f64) -> Result<f64> {
        grid_spacing(x, self.b)
    }

    /// `int_0^s 4u^2 / (sqrt(B)(1-u^4)^(1/4)) du` for `s <= 2^(-1/4)`.
    fn left_integral(b: f64, s: f64) -> Result<f64> {
        let scale = 4.0 / b.sqrt();
        integrate(|u| scale * u * u / (1.0 - u.powi(4)).powf(0.25), 0.0, s, QUAD_TOL)
    }

    fn left_density(&self, s: f64) -> f64 {
        4.0 * s * s / (self.b.sqrt() * (1.0 - s.powi(4)).powf(0.25))
    }

    /// `D(x)` for `x` in `[0, 1]`.
    pub fn interval_coordinate(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("interval coordinate needs x in [0, 1], got {x}")));
        }
        if x <= 0.5 {
            Self::left_integral(self.b, x.powf(0.25))
        } else {
            Ok(self.length - Self::left_integral(self.b, (1.0 - x).powf(0.25))?)
        }
    }

    /// `D^{-1}(z)` for `z` in `[0, L]`.
    pub fn inverse(&self, z: f64) -> Result<f64> {
        let slack = 1e-14 * self.length;
        if !(z >= -slack && z <= self.length + slack) {
            return Err(Error::domain(format!("z = {z} outside [0, L = {}]", self.length)));
        }
        let z = z.clamp(0.0, self.length);
        if z > 0.5 * self.length {
            return Ok(1.0 - self.inverse_left(self.length - z)?);
        }
        self.inverse_left(z)
    }

    /// Solve `D(s^4) = z` for `s` in `[0, 2^(-1/4)]` by safeguarded Newton.
    fn inverse_left(&self, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = 0.5f64.powf(0.25);
        // Small-s expansion D ~ (4/3) s^3 / sqrt(B) as the first guess.
        let mut s = (0.75 * z * self.b.sqrt()).cbrt().clamp(lo, hi);
        for _ in 0..100 {
            let g = Self::left_integral(self.b, s)? - z;
            if g.abs() <= INVERSE_TOL {
                return Ok(s.powi(4));
            }
            if g > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let step = g / self.left_density(s);
            let next = s - step;
            s = if next > lo && next < hi && step.is_finite() { next } else { 0.5 * (lo + hi) };
            if hi - lo < f64::EPSILON * hi {
                return Ok(s.powi(4));
            }
        }
        Err(Error::Solver { iterations: 100, reason: format!("inverse interval coordinate did not converge for z = {z}") })
    }

    /// Grid points `x_j = D^{-1}(j L / N)`, `j = 0..=N`.
    pub fn uniform_preimages(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::param("N must be at least 1"));
        }
        let mut xs = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let x = if j == 0 {
                0.0
            } else if j == n {
                1.0
            } else if 2 * j > n {
                // Mirror of an already computed point when available.
                1.0 - xs[n - j]
            } else {
                self.inverse(j as f64 / n as f64 * self.length)?
            };
            xs.push(x);
        }
        Ok(xs)
    }
}
