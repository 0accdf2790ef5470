use serde::Serialize;

use super::grid::GridMap;
use crate::error::{Error, Result};
use crate::tridiag::TridiagonalMatrix;

fn clamped_sqrt(v: f64) -> f64 {
    v.max(0.0).sqrt()
}

/// `V_N(x) = -(2x-1)^2/2 - B (sqrt((1-x)(x+1/N)) + sqrt((1-x+1/N) x))`.
///
/// At `x = n+/N` this is the row sum of `J_{N+1}/N`: the second-difference
/// stencil has zero row sum, so all of the row sum belongs to the potential.
pub fn potential_vn(x: f64, n: usize, b: f64) -> f64 {
    let h = 1.0 / n as f64;
    let m = 2.0 * x - 1.0;
    -0.5 * m * m - b * (clamped_sqrt((1.0 - x) * (x + h)) + clamped_sqrt((1.0 - x + h) * x))
}

/// The `N -> infinity` limit `-(2x-1)^2/2 - 2B sqrt((1-x) x)`.
pub fn potential_limit(x: f64, b: f64) -> f64 {
    let m = 2.0 * x - 1.0;
    -0.5 * m * m - 2.0 * b * clamped_sqrt((1.0 - x) * x)
}

/// Minima of [`potential_limit`]: `(1 +- sqrt(1-B^2))/2` with value
/// `-(1+B^2)/2` for `0 <= B < 1`, the midpoint with value `-B` otherwise.
pub fn potential_minima_limit(b: f64) -> (Vec<f64>, f64) {
    if b.abs() < 1.0 {
        let r = (1.0 - b * b).sqrt();
        (vec![0.5 * (1.0 - r), 0.5 * (1.0 + r)], -0.5 * (1.0 + b * b))
    } else {
        (vec![0.5], -b.abs())
    }
}

/// Samples of `V_N` on the spin grid `x = j/N` and of `V~_N(y) = V_N(D^{-1}(yL))`
/// on the uniform grid `y = j/N`.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialProfile {
    pub n: usize,
    pub b: f64,
    /// `V_N(j/N)`.
    pub on_spin_grid: Vec<f64>,
    /// `D^{-1}(y_j L)`.
    pub preimages: Vec<f64>,
    /// `V~_N(j/N)`.
    pub on_uniform_grid: Vec<f64>,
    /// `min_j V_N(j/N)`; subtracted by the `shifted_*` accessors.
    pub shift: f64,
}

impl PotentialProfile {
    pub fn new(n: usize, grid: &GridMap) -> Result<Self> {
        let b = grid.field();
        let on_spin_grid: Vec<f64> = (0..=n).map(|j| potential_vn(j as f64 / n as f64, n, b)).collect();
        let preimages = grid.uniform_preimages(n)?;
        let on_uniform_grid = preimages.iter().map(|&x| potential_vn(x, n, b)).collect();
        let shift = on_spin_grid.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { n, b, on_spin_grid, preimages, on_uniform_grid, shift })
    }

    pub fn shifted_spin_grid(&self) -> Vec<f64> {
        self.on_spin_grid.iter().map(|v| v - self.shift).collect()
    }

    pub fn shifted_uniform_grid(&self) -> Vec<f64> {
        self.on_uniform_grid.iter().map(|v| v - self.shift).collect()
    }
}

/// `H~_N = K_N + V~_N` on `y_j = j/N`, `j = 0..=N`, with
/// `K_N = -(1/L^2)[1 -2 1]` and Dirichlet boundary rows.
pub fn build_schrodinger_tridiag(n: usize, b: f64) -> Result<TridiagonalMatrix> {
    let grid = GridMap::new(b)?;
    schrodinger_tridiag_on(n, &grid)
}

pub(crate) fn schrodinger_tridiag_on(n: usize, grid: &GridMap) -> Result<TridiagonalMatrix> {
    if n < 2 {
        return Err(Error::param("the Schrodinger discretisation needs N >= 2"));
    }
    let kinetic = 1.0 / (grid.length() * grid.length());
    let preimages = grid.uniform_preimages(n)?;
    let diag = preimages.iter().map(|&x| potential_vn(x, n, grid.field()) + 2.0 * kinetic).collect();
    TridiagonalMatrix::new(diag, vec![-kinetic; n])
}

impl GridMap {
    /// `H~_N` for this field.
    pub fn schrodinger_matrix(&self, n: usize) -> Result<TridiagonalMatrix> {
        schrodinger_tridiag_on(n, self)
    }
}

/// Local stencil data at interior row `index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StencilPoint {
    pub index: usize,
    /// `T_{j,j+1} / T_{j,j-1}`, the ratio `h_{j-1} / h_j`.
    pub rho: f64,
    /// `h_j = sqrt(2 / (T_{j,j+1} (1 + rho_j)))`.
    pub spacing: f64,
}

/// Read a tridiagonal matrix `m ~ -prefactor * D2 + V` as a non-uniform
/// three-point second-difference stencil `D2` and recover the spacings.
/// For `J_{N+1}/N` the prefactor is `1/N^2` and the spacings approximate `d(x)/N`.
pub fn recover_grid_spacing(m: &TridiagonalMatrix, prefactor: f64) -> Result<Vec<StencilPoint>> {
    if prefactor == 0.0 || !prefactor.is_finite() {
        return Err(Error::param("kinetic prefactor must be finite and non-zero"));
    }
    let off = m.off();
    if let Some(i) = off.iter().position(|&v| v == 0.0) {
        return Err(Error::domain(format!("off-diagonal entry {i} is zero; no stencil to read")));
    }
    let stencil: Vec<f64> = off.iter().map(|&v| -v / prefactor).collect();
    (1..m.len().saturating_sub(1))
        .map(|j| {
            let lower = stencil[j - 1];
            let upper = stencil[j];
            let rho = upper / lower;
            let h2 = 2.0 / (upper * (1.0 + rho));
            if h2.is_nan() || h2 <= 0.0 {
                return Err(Error::domain(format!("row {j} does not have the sign pattern of a second difference")));
            }
            Ok(StencilPoint { index: j, rho, spacing: h2.sqrt() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tridiag::{build_tridiag_cw, scale};
    use crate::ModelParams;

    #[test]
    fn limit_potential_values() {
        assert!((potential_limit(0.5, 0.5) + 0.5).abs() < 1e-15);
        let (mins, v) = potential_minima_limit(0.5);
        assert!((v + 0.625).abs() < 1e-15);
        for m in mins {
            assert!((potential_limit(m, 0.5) - v).abs() < 1e-14);
        }
        let (mins, _) = potential_minima_limit(2.0);
        assert_eq!(mins, vec![0.5]);
    }

    #[test]
    fn vn_equals_row_sums() {
        let n = 50;
        let b = 0.5;
        let j = scale(&build_tridiag_cw(&ModelParams::new(n, b).unwrap()).unwrap(), 1.0 / n as f64).unwrap();
        for (k, rs) in j.row_sums().iter().enumerate() {
            assert!((rs - potential_vn(k as f64 / n as f64, n, b)).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn uniform_stencil_recovers_spacing() {
        let h: f64 = 0.05;
        let k = 1.0 / (h * h);
        let m = TridiagonalMatrix::new(vec![2.0 * k; 9], vec![-k; 8]).unwrap();
        for p in recover_grid_spacing(&m, 1.0).unwrap() {
            assert!((p.spacing - h).abs() < 1e-14);
            assert!((p.rho - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_off_diagonal_rejected() {
        let m = TridiagonalMatrix::new(vec![1.0; 3], vec![-1.0, 0.0]).unwrap();
        assert!(matches!(recover_grid_spacing(&m, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn schrodinger_off_diagonals() {
        let g = GridMap::new(0.5).unwrap();
        let h = g.schrodinger_matrix(20).unwrap();
        let k = 1.0 / (g.length() * g.length());
        assert!(h.off().iter().all(|&v| (v + k).abs() < 1e-15));
        assert!(build_schrodinger_tridiag(1, 0.5).is_err());
    }
}
