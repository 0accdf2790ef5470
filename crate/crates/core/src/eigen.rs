//! Lowest eigenpairs of symmetric tridiagonal matrices.
//!
//! Eigenvalues come from bisection on Sturm counts and are bracketed until
//! the interval collapses to neighbouring floats. Eigenvectors come from
//! inverse iteration on a pivoted LU factorisation of `T - mu I`; vectors
//! whose eigenvalues lie within `1e-3 ||T||` of each other are kept mutually
//! orthogonal by Gram-Schmidt.
//!
//! Eigenvalues closer than [`degeneracy_tolerance`] are numerically
//! degenerate. Inside such a cluster inverse iteration returns an arbitrary
//! orthonormal basis of the eigenspace; [`ClusterPolicy`] decides whether
//! that basis is returned as is or rotated onto mirror-even and mirror-odd
//! representatives.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag::TridiagonalMatrix;

const EPS: f64 = f64::EPSILON;

/// Relative gap used to group eigenvalues whose vectors need reorthogonalisation.
const REORTH_GAP: f64 = 1e-3;

/// Residual bound `||Tv - lambda v|| <= RESIDUAL_TOL * (|lambda| + ||T||)`.
pub const RESIDUAL_TOL: f64 = 1e-11;

const MAX_INVERSE_ITERATIONS: usize = 12;

/// What to return for a numerically degenerate cluster of eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterPolicy {
    /// Whatever orthonormal basis inverse iteration lands on. For the
    /// Curie-Weiss ground pair this is an arbitrary mix of the even and odd
    /// states, typically localized in one well.
    #[default]
    Raw,
    /// Rotate each cluster onto eigenvectors of the index-reversal operator,
    /// even vectors first.
    Symmetrized,
}

impl std::str::FromStr for ClusterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(ClusterPolicy::Raw),
            "symmetrized" | "symmetrised" => Ok(ClusterPolicy::Symmetrized),
            other => Err(Error::param(format!("unknown cluster policy `{other}` (raw|symmetrized)"))),
        }
    }
}

/// Ascending eigenvalues, optional unit eigenvectors and per-pair residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// `||Tv - lambda v||` per pair; empty when no vectors were computed.
    pub residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        self.eigenvectors.as_ref().and_then(|v| v.get(i)).map(Vec::as_slice)
    }
}

/// Eigenvalues closer than this are treated as numerically degenerate.
pub fn degeneracy_tolerance(m: &TridiagonalMatrix) -> f64 {
    1e3 * EPS * m.norm()
}

/// Number of eigenvalues of `m` strictly below `mu`, from the signs of the
/// LDL^T pivots of `m - mu I`.
pub fn sturm_count(m: &TridiagonalMatrix, mu: f64) -> usize {
    let d = m.diag();
    let e = m.off();
    let pivmin = pivot_min(e);
    let mut count = 0;
    let mut q = d[0] - mu;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        q = (d[i] - mu) - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_min(e: &[f64]) -> f64 {
    let emax = e.iter().fold(1.0f64, |acc, v| acc.max(v * v));
    f64::MIN_POSITIVE * emax
}

/// The `k`-th smallest eigenvalue (0-based) by bisection inside `[lo, hi]`.
fn bisect(m: &TridiagonalMatrix, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    let abs_floor = 1e-2 * EPS * m.norm();
    loop {
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        // Invariant: count(lo) <= k < count(hi), so the eigenvalue lies in (lo, hi].
        if mid <= lo || mid >= hi || width <= abs_floor {
            return hi;
        }
        if sturm_count(m, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn bracket(m: &TridiagonalMatrix) -> (f64, f64) {
    let (lo, hi) = m.gershgorin();
    let pad = 2.0 * EPS * m.norm() * m.len() as f64 + f64::MIN_POSITIVE;
    (lo - pad, hi + pad)
}

/// Lowest `k` eigenvalues without vectors.
pub fn eigenvalues_lowest(m: &TridiagonalMatrix, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > m.len() {
        return Err(Error::param(format!("requested {k} eigenvalues of a {}x{} matrix", m.len(), m.len())));
    }
    let (lo, hi) = bracket(m);
    let mut out: Vec<f64> = Vec::with_capacity(k);
    for i in 0..k {
        // Eigenvalue i is at least eigenvalue i-1; start from there when it is a valid lower bound.
        let start = match out.last() {
            Some(&prev) if sturm_count(m, prev) <= i => prev,
            _ => lo,
        };
        out.push(bisect(m, i, start, hi));
    }
    // Bisection brackets are independent; enforce the ordering they imply.
    for i in 1..out.len() {
        if out[i] < out[i - 1] {
            out[i] = out[i - 1];
        }
    }
    Ok(out)
}

/// Lowest `k` eigenpairs with the default (`Raw`) cluster policy.
pub fn eig_lowest(m: &TridiagonalMatrix, k: usize, want_vectors: bool) -> Result<Spectrum> {
    eig_lowest_with(m, k, want_vectors, ClusterPolicy::Raw)
}

pub fn eig_lowest_with(
    m: &TridiagonalMatrix,
    k: usize,
    want_vectors: bool,
    policy: ClusterPolicy,
) -> Result<Spectrum> {
    let eigenvalues = eigenvalues_lowest(m, k)?;
    if !want_vectors {
        return Ok(Spectrum { eigenvalues, eigenvectors: None, residuals: Vec::new() });
    }
    let mut vectors = inverse_iteration(m, &eigenvalues)?;
    if policy == ClusterPolicy::Symmetrized {
        symmetrize_clusters(m, &eigenvalues, &mut vectors);
    }
    for v in vectors.iter_mut() {
        fix_sign(v);
    }
    let residuals = eigenvalues.iter().zip(&vectors).map(|(&l, v)| residual(m, l, v)).collect();
    Ok(Spectrum { eigenvalues, eigenvectors: Some(vectors), residuals })
}

/// The whole spectrum with eigenvectors.
pub fn eig_full(m: &TridiagonalMatrix) -> Result<Spectrum> {
    eig_lowest(m, m.len(), true)
}

pub fn eig_full_with(m: &TridiagonalMatrix, policy: ClusterPolicy) -> Result<Spectrum> {
    eig_lowest_with(m, m.len(), true, policy)
}

/// `|lambda_1 - lambda_0|`.
pub fn splitting(m: &TridiagonalMatrix) -> Result<f64> {
    if m.len() < 2 {
        return Err(Error::param("splitting needs at least a 2x2 matrix"));
    }
    let ev = eigenvalues_lowest(m, 2)?;
    Ok((ev[1] - ev[0]).abs())
}

/// `||Tv - lambda v||_2`.
pub fn residual(m: &TridiagonalMatrix, lambda: f64, v: &[f64]) -> f64 {
    m.matvec(v).iter().zip(v).map(|(tv, x)| (tv - lambda * x).powi(2)).sum::<f64>().sqrt()
}

/// Pivoted LU of a shifted tridiagonal matrix, in the layout of LAPACK `dgttrf`.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(m: &TridiagonalMatrix, mu: f64, tiny: f64) -> Self {
        let n = m.len();
        let mut d: Vec<f64> = m.diag().iter().map(|v| v - mu).collect();
        let mut dl = m.off().to_vec();
        let mut du = m.off().to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Deterministic pseudo-random start vector.
fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x2545_F491_4F6C_DD1D);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    // Two passes of classical Gram-Schmidt.
    for _ in 0..2 {
        for u in against {
            let p = dot(v, u);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
        }
    }
}

fn inverse_iteration(m: &TridiagonalMatrix, eigenvalues: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    let norm = m.norm();
    if n == 1 {
        return Ok(vec![vec![1.0]]);
    }
    let tiny = EPS * norm.max(f64::MIN_POSITIVE);
    let reorth_gap = REORTH_GAP * norm;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
    let mut group_start = 0;
    let mut prev_shift = f64::NEG_INFINITY;
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        if j > 0 && lambda - eigenvalues[j - 1] > reorth_gap {
            group_start = j;
        }
        // Coincident shifts give identical solves; nudge them apart.
        let pert = 10.0 * EPS * lambda.abs().max(norm * 1e-3);
        let mut mu = lambda;
        if j > group_start && mu - prev_shift < pert {
            mu = prev_shift + pert;
        }
        prev_shift = mu;
        let lu = ShiftedLu::factor(m, mu, tiny);
        let mut v = start_vector(n, j as u64 + 1);
        orthogonalize(&mut v, &vectors[group_start..j]);
        normalize(&mut v);
        let bound = RESIDUAL_TOL * (lambda.abs() + norm);
        let mut converged = false;
        let mut iterations = 0;
        while iterations < MAX_INVERSE_ITERATIONS {
            iterations += 1;
            lu.solve(&mut v);
            orthogonalize(&mut v, &vectors[group_start..j]);
            if normalize(&mut v) == 0.0 {
                v = start_vector(n, (j + 7 * iterations) as u64);
                orthogonalize(&mut v, &vectors[group_start..j]);
                normalize(&mut v);
                continue;
            }
            if iterations >= 2 && residual(m, lambda, &v) <= bound {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Solver {
                iterations,
                reason: format!(
                    "inverse iteration stagnated for eigenvalue {j} (lambda = {lambda:e}) in cluster starting at {group_start}"
                ),
            });
        }
        vectors.push(v);
    }
    Ok(vectors)
}

/// Index ranges `[start, end)` of numerically degenerate clusters (size >= 2).
pub fn degenerate_clusters(m: &TridiagonalMatrix, eigenvalues: &[f64]) -> Vec<(usize, usize)> {
    let tol = degeneracy_tolerance(m);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > tol {
            if i - start >= 2 {
                out.push((start, i));
            }
            start = i;
        }
    }
    out
}

fn symmetrize_clusters(m: &TridiagonalMatrix, eigenvalues: &[f64], vectors: &mut [Vec<f64>]) {
    let mirror = m.is_mirror_symmetric(0.0);
    let clusters = if mirror {
        // Reversal commutes with T, so parity can be restored in any group of
        // close eigenvalues; inverse iteration mixes vectors up to roughly
        // eps ||T|| / gap, which matters for gaps below sqrt(eps) ||T||.
        clusters_within(eigenvalues, degeneracy_tolerance(m).max(EPS.sqrt() * m.norm()))
    } else {
        degenerate_clusters(m, eigenvalues)
    };
    let tie = degeneracy_tolerance(m);
    for (start, end) in clusters {
        let rotated = rotate_by_parity(&vectors[start..end]);
        let mut pairs: Vec<(f64, bool, Vec<f64>)> = if mirror {
            let (even, odd): (Vec<_>, Vec<_>) = rotated.into_iter().partition(|(p, _)| *p > 0.0);
            let mut out = ritz(m, even.into_iter().map(|(_, v)| v).collect(), true);
            out.extend(ritz(m, odd.into_iter().map(|(_, v)| v).collect(), false));
            out
        } else {
            rotated.into_iter().map(|(p, v)| (0.0, p > 0.0, v)).collect()
        };
        if mirror {
            // Ascending Ritz values; exact ties put the even vector first.
            pairs.sort_by(|a, b| {
                if (a.0 - b.0).abs() <= tie {
                    b.1.cmp(&a.1)
                } else {
                    a.0.total_cmp(&b.0)
                }
            });
        }
        for (slot, (_, _, w)) in vectors[start..end].iter_mut().zip(pairs) {
            *slot = w;
        }
    }
}

fn clusters_within(eigenvalues: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > tol {
            if i - start >= 2 {
                out.push((start, i));
            }
            start = i;
        }
    }
    out
}

fn combine(vs: &[Vec<f64>], coefs: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut w = vec![0.0; vs[0].len()];
    for (a, v) in vs.iter().enumerate() {
        let c = coefs(a);
        w.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
    }
    w
}

/// Eigenvectors of the reversal operator restricted to `span(vs)`, as
/// `(parity estimate, vector)`, even vectors first.
fn rotate_by_parity(vs: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let size = vs.len();
    let reflected: Vec<Vec<f64>> = vs.iter().map(|v| v.iter().rev().copied().collect()).collect();
    let r = DMatrix::from_fn(size, size, |a, b| dot(&vs[a], &reflected[b]));
    let r = (&r + r.transpose()) * 0.5;
    let eig = SymmetricEigen::new(r);
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order
        .iter()
        .map(|&c| {
            let mut w = combine(vs, |a| eig.eigenvectors[(a, c)]);
            normalize(&mut w);
            (eig.eigenvalues[c], w)
        })
        .collect()
}

/// Rayleigh-Ritz of `T` on `span(vs)` after projecting each vector onto the
/// requested parity. Returns `(ritz value, even, vector)`.
fn ritz(m: &TridiagonalMatrix, vs: Vec<Vec<f64>>, even: bool) -> Vec<(f64, bool, Vec<f64>)> {
    if vs.is_empty() {
        return Vec::new();
    }
    let sign = if even { 1.0 } else { -1.0 };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut p: Vec<f64> = v.iter().zip(v.iter().rev()).map(|(a, b)| 0.5 * (a + sign * b)).collect();
        for _ in 0..2 {
            for u in &basis {
                let c = dot(&p, u);
                p.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        normalize(&mut p);
        basis.push(p);
    }
    let tv: Vec<Vec<f64>> = basis.iter().map(|v| m.matvec(v)).collect();
    let k = basis.len();
    let small = DMatrix::from_fn(k, k, |a, b| 0.5 * (dot(&basis[a], &tv[b]) + dot(&basis[b], &tv[a])));
    let eig = SymmetricEigen::new(small);
    (0..k)
        .map(|c| {
            let mut w = combine(&basis, |a| eig.eigenvectors[(a, c)]);
            normalize(&mut w);
            (eig.eigenvalues[c], even, w)
        })
        .collect()
}

/// Flip `v` so that its largest-magnitude entry is positive. Near-ties
/// (within 1e-8 relative) resolve to the lowest index.
pub fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-8)) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
