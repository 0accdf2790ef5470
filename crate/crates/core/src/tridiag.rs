//! Symmetric tridiagonal reduction of the Curie-Weiss Hamiltonian.
//!
//! On the symmetric subspace spanned by `|n+>` (n+ spins up, `n+ = 0..=N`)
//! the Hamiltonian is the `(N+1) x (N+1)` matrix with
//!
//! - diagonal `-(2n+ - N)^2 / (2N)`,
//! - off-diagonal `-B sqrt((N - n+)(n+ + 1))` coupling `n+` and `n+ + 1`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{flea_bump, FleaParams, ModelParams};

/// Real symmetric tridiagonal matrix. `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::param("tridiagonal matrix must have at least one row"));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::Dimension { expected: diag.len() - 1, got: off.len() });
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("tridiagonal entries must be finite"));
        }
        Ok(Self { diag, off })
    }

    /// Constant matrix with `a` on the diagonal and `b` off it.
    pub fn constant(size: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a; size], vec![b; size.saturating_sub(1)])
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = self.off.get(i).map_or(0.0, |v| v.abs());
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.len() {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = self.off.get(i).map_or(0.0, |v| v.abs());
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.len(), "vector length must match matrix size");
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Row sums `T[i,i-1] + T[i,i] + T[i,i+1]`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.matvec(&vec![1.0; self.len()])
    }

    /// The matrix with its index order reversed.
    pub fn mirrored(&self) -> Self {
        Self {
            diag: self.diag.iter().rev().copied().collect(),
            off: self.off.iter().rev().copied().collect(),
        }
    }

    /// Whether reversing the index order leaves the matrix unchanged to `tol`.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let m = self.mirrored();
        self.diag.iter().zip(&m.diag).chain(self.off.iter().zip(&m.off)).all(|(a, b)| (a - b).abs() <= tol)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.off.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        m
    }

    pub(crate) fn diag_mut(&mut self) -> &mut [f64] {
        &mut self.diag
    }
}

/// `J_{N+1}`: the Curie-Weiss Hamiltonian restricted to the symmetric subspace.
/// Any flea in `params` is ignored; see [`build_hamiltonian`].
pub fn build_tridiag_cw(params: &ModelParams) -> Result<TridiagonalMatrix> {
    params.validate()?;
    let n = params.n;
    let nf = n as f64;
    let j = params.coupling();
    let diag = (0..=n)
        .map(|k| {
            let m = 2.0 * k as f64 - nf;
            -j * m * m / (2.0 * nf)
        })
        .collect();
    let off = (0..n).map(|k| -params.b * (((n - k) * (k + 1)) as f64).sqrt()).collect();
    TridiagonalMatrix::new(diag, off)
}

/// `J_{N+1}` plus the flea of `params`, if any.
pub fn build_hamiltonian(params: &ModelParams) -> Result<TridiagonalMatrix> {
    let m = build_tridiag_cw(params)?;
    match &params.flea {
        Some(f) => apply_flea(&m, f, params.n),
        None => Ok(m),
    }
}

pub fn scale(m: &TridiagonalMatrix, factor: f64) -> Result<TridiagonalMatrix> {
    if factor == 0.0 || !factor.is_finite() {
        return Err(Error::param(format!("scale factor must be finite and non-zero, got {factor}")));
    }
    Ok(TridiagonalMatrix {
        diag: m.diag.iter().map(|v| v * factor).collect(),
        off: m.off.iter().map(|v| v * factor).collect(),
    })
}

/// Add the flea bump evaluated at `k/N` to diagonal entry `k`.
pub fn apply_flea(m: &TridiagonalMatrix, flea: &FleaParams, n: usize) -> Result<TridiagonalMatrix> {
    if m.len() != n + 1 {
        return Err(Error::Dimension { expected: n + 1, got: m.len() });
    }
    flea.validate()?;
    let mut out = m.clone();
    for (k, d) in out.diag_mut().iter_mut().enumerate() {
        *d += flea_bump(k as f64 / n as f64, flea);
    }
    Ok(out)
}

/// Diagonal indices `k` whose grid point `k/N` lies inside the flea support.
pub fn flea_support_indices(flea: &FleaParams, n: usize) -> Vec<usize> {
    (0..=n).filter(|&k| flea.in_support(k as f64 / n as f64)).collect()
}

/// Uniform longitudinal field `eps * sum_x sigma_3(x)`, diagonal `eps (2n+ - N)`.
/// Kept only as a comparison against the flea.
pub fn apply_longitudinal_field(m: &TridiagonalMatrix, eps: f64) -> TridiagonalMatrix {
    let n = m.len() - 1;
    let mut out = m.clone();
    for (k, d) in out.diag_mut().iter_mut().enumerate() {
        *d += eps * (2.0 * k as f64 - n as f64);
    }
    out
}
