//! Model parameters shared by the spin and tridiagonal constructions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the Curie-Weiss Hamiltonian with coupling fixed to `J = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of sites.
    pub n: usize,
    /// Transverse field strength.
    pub b: f64,
    /// Optional symmetry-breaking bump added on the diagonal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flea: Option<FleaParams>,
}

impl ModelParams {
    pub fn new(n: usize, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("N must be at least 1"));
        }
        if !b.is_finite() {
            return Err(Error::param(format!("B must be finite, got {b}")));
        }
        Ok(Self { n, b, flea: None })
    }

    pub fn with_flea(mut self, flea: FleaParams) -> Self {
        self.flea = Some(flea);
        self
    }

    /// Coupling constant; the Hamiltonian is dimensionless with `J = 1`.
    pub const fn coupling(&self) -> f64 {
        1.0
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.n, self.b)?;
        if let Some(f) = &self.flea {
            f.validate()?;
        }
        Ok(())
    }
}

/// A smooth, compactly supported bump `d * exp(1/c^2 - 1/(c^2 - (x-b)^2))`
/// centred at `b` with half-width `c` and height `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleaParams {
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl FleaParams {
    pub fn new(b: f64, c: f64, d: f64) -> Result<Self> {
        let f = Self { b, c, d };
        f.validate()?;
        Ok(f)
    }

    /// Centre given in the `(N - m)/N` style used for grid-aligned fleas.
    pub fn grid_aligned(n: usize, index: usize, c: f64, d: f64) -> Result<Self> {
        Self::new(index as f64 / n as f64, c, d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.c.is_finite() && self.d.is_finite()) {
            return Err(Error::param("flea parameters must be finite"));
        }
        if self.c <= 0.0 {
            return Err(Error::param(format!("flea half-width c must be positive, got {}", self.c)));
        }
        if self.b + self.c <= 0.0 || self.b - self.c >= 1.0 {
            return Err(Error::param("flea support does not meet [0, 1]"));
        }
        Ok(())
    }

    /// Open support interval `(b - c, b + c)`.
    pub fn support(&self) -> (f64, f64) {
        (self.b - self.c, self.b + self.c)
    }

    pub fn in_support(&self, x: f64) -> bool {
        (x - self.b).abs() < self.c
    }

    /// Reflect the bump through `x = 1/2`.
    pub fn mirrored(&self) -> Self {
        Self { b: 1.0 - self.b, ..*self }
    }
}

/// Evaluate the flea bump at `x`. Values below the smallest normal double
/// near the edge of the support flush to zero.
pub fn flea_bump(x: f64, flea: &FleaParams) -> f64 {
    let dx = x - flea.b;
    let c2 = flea.c * flea.c;
    if dx.abs() >= flea.c {
        return 0.0;
    }
    let exponent = 1.0 / c2 - 1.0 / (c2 - dx * dx);
    let v = flea.d * exponent.exp();
    if v.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_peaks_at_centre() {
        let f = FleaParams::new(0.3, 0.1, 0.7).unwrap();
        assert_eq!(flea_bump(0.3, &f), 0.7);
        assert_eq!(flea_bump(0.4, &f), 0.0);
        assert_eq!(flea_bump(0.2, &f), 0.0);
        assert_eq!(flea_bump(0.95, &f), 0.0);
    }

    #[test]
    fn bump_underflows_to_zero_inside_support() {
        let c = 1.0 / 45.0;
        let f = FleaParams::new(0.5, c, 0.4).unwrap();
        // exponent = 1/c^2 - 2/c^2 = -2025
        let v = flea_bump(0.5 + c / 2f64.sqrt(), &f);
        assert_eq!(v, 0.0);
        assert!(f.in_support(0.5 + c / 2f64.sqrt()));
    }

    #[test]
    fn bump_is_smooth_and_positive_near_centre() {
        let f = FleaParams::new(0.5, 0.2, 1.0).unwrap();
        let v = flea_bump(0.55, &f);
        let expected = (1.0 / 0.04 - 1.0 / (0.04 - 0.0025f64)).exp();
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FleaParams::new(0.5, 0.0, 1.0).is_err());
        assert!(FleaParams::new(2.0, 0.1, 1.0).is_err());
        assert!(FleaParams::new(f64::NAN, 0.1, 1.0).is_err());
        assert!(ModelParams::new(0, 0.5).is_err());
        assert!(ModelParams::new(3, f64::INFINITY).is_err());
    }
}
