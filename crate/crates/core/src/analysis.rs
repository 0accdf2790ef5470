//! Measurements on eigensolutions: splittings, widths, localization,
//! harmonic fits and spectrum comparisons.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eigen::{degeneracy_tolerance, eig_lowest, eigenvalues_lowest, splitting};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::schrodinger::{potential_minima_limit, potential_vn};
use crate::tridiag::{build_tridiag_cw, scale};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingPoint {
    pub n: usize,
    /// Gap of `J_{N+1}`.
    pub unscaled: f64,
    /// Gap of `J_{N+1}/N`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingCurve {
    pub b: f64,
    pub points: Vec<SplittingPoint>,
}

pub fn splitting_point(b: f64, n: usize) -> Result<SplittingPoint> {
    let params = ModelParams::new(n, b)?;
    let j = build_tridiag_cw(&params)?;
    let unscaled = splitting(&j)?;
    let scaled = splitting(&scale(&j, 1.0 / n as f64)?)?;
    Ok(SplittingPoint { n, unscaled, scaled })
}

pub fn splitting_curve(b: f64, ns: &[usize]) -> Result<SplittingCurve> {
    if ns.is_empty() {
        return Err(Error::param("N list is empty"));
    }
    let points = ns.iter().map(|&n| splitting_point(b, n)).collect::<Result<_>>()?;
    Ok(SplittingCurve { b, points })
}

/// Width at half height of `|v|`, in grid indices, with the two outer
/// crossings located by linear interpolation. A peak resolved by a single
/// sample has width 0.
pub fn width_half_height(v: &[f64]) -> Result<f64> {
    let a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let (peak, max) = a
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
    if max == 0.0 {
        return Err(Error::param("width of a zero vector"));
    }
    let half = 0.5 * max;
    let runs = runs_above(&a, half);
    if runs.len() > 1 {
        let peaks: Vec<usize> = runs
            .iter()
            .map(|&(s, e)| (s..=e).fold(s, |best, i| if a[i] > a[best] { i } else { best }))
            .collect();
        return Err(Error::Ambiguity(format!("{} peaks above half height at indices {peaks:?}", peaks.len())));
    }
    let (first, last) = runs[0];
    if first == last {
        debug_assert_eq!(first, peak);
        return Ok(0.0);
    }
    let left = if first == 0 { 0.0 } else { first as f64 - (a[first] - half) / (a[first] - a[first - 1]) };
    let right = if last + 1 == a.len() {
        last as f64
    } else {
        last as f64 + (a[last] - half) / (a[last] - a[last + 1])
    };
    Ok(right - left)
}

fn runs_above(a: &[f64], level: f64) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &x) in a.iter().enumerate() {
        match (x >= level, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, a.len() - 1));
    }
    runs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationReport {
    /// Mass on `k/N < 1/2`.
    pub left_mass: f64,
    /// Mass on `k/N > 1/2`.
    pub right_mass: f64,
    /// Mass at `k = N/2` (zero for odd `N`).
    pub mid_mass: f64,
    pub peak_index: usize,
    /// `sum_k c_k^2 (2k - N)/N`.
    pub magnetization: f64,
}

/// Masses and magnetization of a coefficient vector indexed by `k = n+`.
pub fn localization_report(v: &[f64], n: usize) -> Result<LocalizationReport> {
    if v.len() != n + 1 {
        return Err(Error::Dimension { expected: n + 1, got: v.len() });
    }
    let (mut left, mut right, mut mid, mut mag) = (0.0, 0.0, 0.0, 0.0);
    let mut peak = 0;
    for (k, &c) in v.iter().enumerate() {
        let w = c * c;
        match (2 * k).cmp(&n) {
            std::cmp::Ordering::Less => left += w,
            std::cmp::Ordering::Greater => right += w,
            std::cmp::Ordering::Equal => mid += w,
        }
        mag += w * (2.0 * k as f64 - n as f64) / n as f64;
        if c.abs() > v[peak].abs() {
            peak = k;
        }
    }
    Ok(LocalizationReport { left_mass: left, right_mass: right, mid_mass: mid, peak_index: peak, magnetization: mag })
}

/// Rotate a (near-)degenerate pair into its left- and right-localized
/// combinations: the eigenvectors of the left-mass operator restricted to
/// `span{v0, v1}`. Returns `(left, right)`, each sign-fixed.
pub fn localized_pair(v0: &[f64], v1: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if v0.len() != v1.len() {
        return Err(Error::Dimension { expected: v0.len(), got: v1.len() });
    }
    let left_len = (v0.len() - 1).div_ceil(2);
    let mut m = [[0.0; 2]; 2];
    for k in 0..left_len {
        m[0][0] += v0[k] * v0[k];
        m[0][1] += v0[k] * v1[k];
        m[1][1] += v1[k] * v1[k];
    }
    m[1][0] = m[0][1];
    // Rotation angle that diagonalises the 2x2 block.
    let theta = 0.5 * (2.0 * m[0][1]).atan2(m[0][0] - m[1][1]);
    let (s, c) = theta.sin_cos();
    let mut a: Vec<f64> = v0.iter().zip(v1).map(|(x, y)| c * x + s * y).collect();
    let mut b: Vec<f64> = v0.iter().zip(v1).map(|(x, y)| -s * x + c * y).collect();
    let left_a: f64 = a.iter().take(left_len).map(|x| x * x).sum();
    let left_b: f64 = b.iter().take(left_len).map(|x| x * x).sum();
    if left_b > left_a {
        std::mem::swap(&mut a, &mut b);
    }
    crate::eigen::fix_sign(&mut a);
    crate::eigen::fix_sign(&mut b);
    Ok((a, b))
}

/// Width of the left-localized ground-state combination of `J_{N+1}/N`.
pub fn localized_width(b: f64, n: usize) -> Result<f64> {
    let params = ModelParams::new(n, b)?;
    let m = scale(&build_tridiag_cw(&params)?, 1.0 / n as f64)?;
    let spec = eig_lowest(&m, 2, true)?;
    let vecs = spec.eigenvectors.as_ref().expect("vectors requested");
    let (left, _) = localized_pair(&vecs[0], &vecs[1])?;
    width_half_height(&left)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicFit {
    /// Levels after collapsing degenerate pairs.
    pub levels: Vec<f64>,
    pub spacing: f64,
    pub offset: f64,
    pub residuals: Vec<f64>,
    pub spacing_times_n: f64,
}

/// Merge consecutive levels closer than `tol` into their mean.
pub fn collapse_pairs(levels: &[f64], tol: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels.len());
    let mut i = 0;
    while i < levels.len() {
        if i + 1 < levels.len() && (levels[i + 1] - levels[i]).abs() < tol {
            out.push(0.5 * (levels[i] + levels[i + 1]));
            i += 2;
        } else {
            out.push(levels[i]);
            i += 1;
        }
    }
    out
}

/// Collapse pairs closer than `collapse_tol`, then least-squares fit
/// `E_n = spacing * (n + 1/2) + offset`.
pub fn harmonic_fit(spectrum: &[f64], n: usize, collapse_tol: f64) -> Result<HarmonicFit> {
    let levels = collapse_pairs(spectrum, collapse_tol);
    if levels.len() < 2 {
        return Err(Error::param(format!("harmonic fit needs at least 2 distinct levels, got {}", levels.len())));
    }
    let xs: Vec<f64> = (0..levels.len()).map(|k| k as f64 + 0.5).collect();
    let (spacing, offset) = linear_fit(&xs, &levels);
    let residuals = xs.iter().zip(&levels).map(|(x, e)| e - (spacing * x + offset)).collect();
    Ok(HarmonicFit { levels, spacing, offset, residuals, spacing_times_n: spacing * n as f64 })
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope and intercept of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::param("log-log fit needs at least two paired samples"));
    }
    if xs.iter().chain(ys).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::domain("log-log fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(linear_fit(&lx, &ly))
}

/// `min_j V_N(j/N)`, the shift applied to "shifted" spectra of `J_{N+1}/N`.
pub fn spectrum_shift(n: usize, b: f64) -> f64 {
    (0..=n).map(|j| potential_vn(j as f64 / n as f64, n, b)).fold(f64::INFINITY, f64::min)
}

/// Lowest `levels` eigenvalues of `J_{N+1}/N` minus [`spectrum_shift`].
pub fn shifted_levels(n: usize, b: f64, levels: usize) -> Result<Vec<f64>> {
    let params = ModelParams::new(n, b)?;
    let m = scale(&build_tridiag_cw(&params)?, 1.0 / n as f64)?;
    let shift = spectrum_shift(n, b);
    Ok(eigenvalues_lowest(&m, levels)?.into_iter().map(|e| e - shift).collect())
}

/// Harmonic fit of the lowest `levels` shifted eigenvalues of `J_{N+1}/N`,
/// collapsing pairs closer than ten times the degeneracy floor.
pub fn table2(n: usize, b: f64, levels: usize) -> Result<HarmonicFit> {
    let params = ModelParams::new(n, b)?;
    let m = scale(&build_tridiag_cw(&params)?, 1.0 / n as f64)?;
    let shift = spectrum_shift(n, b);
    let shifted: Vec<f64> = eigenvalues_lowest(&m, levels)?.into_iter().map(|e| e - shift).collect();
    harmonic_fit(&shifted, n, 10.0 * degeneracy_tolerance(&m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table3Row {
    pub n: usize,
    /// `N * lambda_0` of `J_{N+1}/N`.
    pub unshifted: f64,
    /// `N * (lambda_0 - min_j V_N(j/N))`.
    pub shifted: f64,
}

pub fn table3_row(n: usize, b: f64) -> Result<Table3Row> {
    let params = ModelParams::new(n, b)?;
    let m = scale(&build_tridiag_cw(&params)?, 1.0 / n as f64)?;
    let l0 = eigenvalues_lowest(&m, 1)?[0];
    let nf = n as f64;
    Ok(Table3Row { n, unshifted: nf * l0, shifted: nf * (l0 - spectrum_shift(n, b)) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumComparison {
    pub rows: Vec<ComparisonRow>,
    pub max_diff: f64,
}

pub fn spectrum_compare(a: &[f64], b: &[f64], k: usize) -> Result<SpectrumComparison> {
    if a.len() < k || b.len() < k {
        return Err(Error::param(format!("need {k} levels, have {} and {}", a.len(), b.len())));
    }
    let rows: Vec<ComparisonRow> =
        (0..k).map(|n| ComparisonRow { n, a: a[n], b: b[n], abs_diff: (a[n] - b[n]).abs() }).collect();
    let max_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    Ok(SpectrumComparison { rows, max_diff })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianFit {
    pub components: Vec<GaussianComponent>,
    /// Root mean square of the residual.
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianReport {
    pub fit: GaussianFit,
    /// Classical minima of the limit potential.
    pub expected_centers: Vec<f64>,
    /// `N * |center - nearest expected|` per component.
    pub center_offsets: Vec<f64>,
}

const LM_MAX_ITERATIONS: usize = 500;

/// Levenberg-Marquardt fit of `components` translated Gaussians
/// `w exp(-(x-mu)^2/(2 s^2))` to `v` sampled at `x_i = i/N`.
pub fn gaussian_fit(v: &[f64], components: usize) -> Result<GaussianFit> {
    if !(1..=2).contains(&components) {
        return Err(Error::param("fit one or two Gaussians"));
    }
    let n = v.len().checked_sub(1).filter(|&n| n >= 2).ok_or_else(|| Error::param("vector too short to fit"))?;
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut p = initial_guess(v, n, components);

    let eval = |p: &[f64]| -> Vec<f64> {
        xs.iter()
            .zip(v)
            .map(|(&x, &y)| {
                p.chunks(3).map(|g| g[0] * (-(x - g[1]).powi(2) / (2.0 * g[2] * g[2])).exp()).sum::<f64>() - y
            })
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    let mut r = eval(&p);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < LM_MAX_ITERATIONS {
        iterations += 1;
        let jac = DMatrix::from_fn(xs.len(), p.len(), |i, j| {
            let g = &p[3 * (j / 3)..3 * (j / 3) + 3];
            let d = xs[i] - g[1];
            let e = (-d * d / (2.0 * g[2] * g[2])).exp();
            match j % 3 {
                0 => e,
                1 => g[0] * e * d / (g[2] * g[2]),
                _ => g[0] * e * d * d / g[2].powi(3),
            }
        });
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..p.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let tr = eval(&trial);
            let tc = cost(&tr);
            if tc.is_finite() && tc < c && trial.chunks(3).all(|g| g[2] > 0.0) {
                let rel = (c - tc) / c.max(f64::MIN_POSITIVE);
                let small_step = step.norm() <= 1e-12 * (1.0 + DVector::from_column_slice(&p).norm());
                p = trial;
                r = tr;
                c = tc;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < 1e-14 || small_step {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left: at a minimum to working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    let mut components: Vec<GaussianComponent> =
        p.chunks(3).map(|g| GaussianComponent { weight: g[0], center: g[1], width: g[2].abs() }).collect();
    components.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(GaussianFit { components, rms_residual: (c / xs.len() as f64).sqrt(), iterations, converged })
}

fn initial_guess(v: &[f64], n: usize, components: usize) -> Vec<f64> {
    let ranges: Vec<(usize, usize)> =
        if components == 1 { vec![(0, n)] } else { vec![(0, n / 2), (n.div_ceil(2), n)] };
    let mut p = Vec::with_capacity(3 * components);
    for (lo, hi) in ranges {
        let peak = (lo..=hi).fold(lo, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
        let half = 0.5 * v[peak].abs();
        let mut a = peak;
        while a > lo && v[a - 1].abs() >= half {
            a -= 1;
        }
        let mut b = peak;
        while b < hi && v[b + 1].abs() >= half {
            b += 1;
        }
        let fwhm = ((b - a) as f64 + 1.0) / n as f64;
        p.extend([v[peak], peak as f64 / n as f64, fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())]);
    }
    p
}

/// Fit one Gaussian (localized profiles) or two (profiles with appreciable
/// mass on both sides) and compare the centres with the classical minima.
pub fn gaussian_compare(v: &[f64], n: usize, b: f64) -> Result<GaussianReport> {
    let loc = localization_report(v, n)?;
    let components = if loc.left_mass.min(loc.right_mass) > 0.05 { 2 } else { 1 };
    let fit = gaussian_fit(v, components)?;
    let (expected_centers, _) = potential_minima_limit(b);
    let center_offsets = fit
        .components
        .iter()
        .map(|g| expected_centers.iter().map(|&m| (g.center - m).abs()).fold(f64::INFINITY, f64::min) * n as f64)
        .collect();
    Ok(GaussianReport { fit, expected_centers, center_offsets })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(len: usize, i0: f64, s: f64) -> Vec<f64> {
        (0..len).map(|i| (-(i as f64 - i0).powi(2) / (2.0 * s * s)).exp()).collect()
    }

    #[test]
    fn width_of_sampled_gaussian() {
        let s = 12.0;
        let w = width_half_height(&gaussian(201, 100.0, s)).unwrap();
        let exact = 2.0 * s * (2.0 * std::f64::consts::LN_2).sqrt();
        assert!((w - exact).abs() < 0.05, "{w} vs {exact}");
    }

    #[test]
    fn width_of_delta_is_zero() {
        let mut v = vec![0.0; 11];
        v[4] = -1.0;
        assert_eq!(width_half_height(&v).unwrap(), 0.0);
    }

    #[test]
    fn two_peaks_are_ambiguous() {
        let v: Vec<f64> = gaussian(101, 20.0, 3.0).iter().zip(gaussian(101, 80.0, 3.0)).map(|(a, b)| a + b).collect();
        match width_half_height(&v) {
            Err(Error::Ambiguity(msg)) => assert!(msg.contains("[20, 80]"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn masses_partition() {
        let v = [0.5, 0.5, 0.5, 0.5, 0.0];
        let r = localization_report(&v, 4).unwrap();
        assert_eq!((r.left_mass, r.mid_mass, r.right_mass), (0.5, 0.25, 0.25));
        assert!((r.magnetization - (0.25 * (-1.0 - 0.5 + 0.5))).abs() < 1e-15);
        assert!(localization_report(&v, 5).is_err());
    }

    #[test]
    fn rotation_separates_wells() {
        let l = gaussian(41, 8.0, 2.0);
        let r = gaussian(41, 32.0, 2.0);
        let norm = (2.0 * l.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let even: Vec<f64> = l.iter().zip(&r).map(|(a, b)| (a + b) / norm).collect();
        let odd: Vec<f64> = l.iter().zip(&r).map(|(a, b)| (a - b) / norm).collect();
        let (left, right) = localized_pair(&even, &odd).unwrap();
        assert!(localization_report(&left, 40).unwrap().left_mass > 1.0 - 1e-12);
        assert!(localization_report(&right, 40).unwrap().right_mass > 1.0 - 1e-12);
    }

    #[test]
    fn collapse_and_fit_exact_ladder() {
        let spectrum: Vec<f64> = (0..5).flat_map(|k| [0.3 * (k as f64 + 0.5) + 1.0; 2]).collect();
        let fit = harmonic_fit(&spectrum, 10, 1e-12).unwrap();
        assert_eq!(fit.levels.len(), 5);
        assert!((fit.spacing - 0.3).abs() < 1e-14 && (fit.offset - 1.0).abs() < 1e-14);
        assert!((fit.spacing_times_n - 3.0).abs() < 1e-12);
        assert!(harmonic_fit(&[1.0, 1.0], 10, 1e-12).is_err());
    }

    #[test]
    fn loglog_of_power_law() {
        let xs: Vec<f64> = (1..10).map(|k| k as f64 * 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(0.5)).collect();
        let (s, c) = loglog_slope(&xs, &ys).unwrap();
        assert!((s - 0.5).abs() < 1e-12 && (c - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn identical_spectra_compare_to_zero() {
        let a = [1.0, 2.0, 3.0];
        let c = spectrum_compare(&a, &a, 3).unwrap();
        assert_eq!(c.max_diff, 0.0);
        assert!(spectrum_compare(&a, &a, 4).is_err());
    }

    #[test]
    fn recovers_two_synthetic_gaussians() {
        let n = 200;
        let v: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 / n as f64;
                0.7 * (-(x - 0.23f64).powi(2) / (2.0 * 0.03f64.powi(2))).exp()
                    + 0.4 * (-(x - 0.71f64).powi(2) / (2.0 * 0.05f64.powi(2))).exp()
            })
            .collect();
        let fit = gaussian_fit(&v, 2).unwrap();
        assert!(fit.converged);
        assert!((fit.components[0].center - 0.23).abs() * n as f64 <= 1.0);
        assert!((fit.components[1].center - 0.71).abs() * n as f64 <= 1.0);
        assert!(fit.rms_residual < 1e-8);
    }

    #[test]
    fn splitting_vanishes_without_field() {
        let p = splitting_point(0.0, 10).unwrap();
        assert_eq!(p.unscaled, 0.0);
        assert!(splitting_curve(0.5, &[]).is_err());
    }
}
