//! Exact construction of the Curie-Weiss Hamiltonian on all `2^N` spin
//! configurations, used as an oracle for the tridiagonal reduction.
//!
//! Basis index bit `x` is the spin at site `x`: 0 is up, 1 is down. The
//! number of down spins `k = popcount(index)` labels the permutation orbit
//! the configuration belongs to, and `n+ = N - k`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{flea_bump, ModelParams};

/// Largest site count accepted by the dense constructions.
pub const MAX_DENSE_SITES: usize = 14;

/// Relative gap above which the lowest eigenvalue counts as simple.
pub const SIMPLICITY_TOL: f64 = 1e-9;

/// Spin configuration as a basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinBasisIndex {
    pub index: usize,
    pub n: usize,
}

impl SpinBasisIndex {
    pub fn new(index: usize, n: usize) -> Result<Self> {
        if n > usize::BITS as usize - 1 || index >> n != 0 {
            return Err(Error::param(format!("basis index {index} out of range for N = {n}")));
        }
        Ok(Self { index, n })
    }

    pub fn down_spins(&self) -> usize {
        self.index.count_ones() as usize
    }

    pub fn up_spins(&self) -> usize {
        self.n - self.down_spins()
    }

    /// Orbit label `k`, the number of down spins.
    pub fn orbit(&self) -> usize {
        self.down_spins()
    }

    pub fn is_up(&self, site: usize) -> bool {
        self.index >> site & 1 == 0
    }
}

/// Dense `2^N x 2^N` matrix of `h_N` (plus the flea, if the params carry one).
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    pub params: ModelParams,
    matrix: DMatrix<f64>,
}

impl DenseHamiltonian {
    /// Wrap an arbitrary square matrix, e.g. to exercise the structural checks.
    pub fn from_matrix(params: ModelParams, matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension { expected: matrix.nrows(), got: matrix.ncols() });
        }
        Ok(Self { params, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix == self.matrix.transpose()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * x).as_slice().to_vec()
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Non-zero pattern as row lists, for fast repeated products.
    fn sparse_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).filter_map(|j| {
                let v = self.matrix[(i, j)];
                (v != 0.0).then_some((j, v))
            }).collect())
            .collect()
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_SITES {
        return Err(Error::Capacity { n, max: MAX_DENSE_SITES });
    }
    Ok(())
}

/// `h_N = -(1/2N) sum_{x,y} s3(x) s3(y) - B sum_x s1(x)` on all configurations.
/// A flea adds `bump(n+/N)` on the diagonal of every configuration with `n+` up spins.
pub fn build_dense_cw(params: &ModelParams) -> Result<DenseHamiltonian> {
    params.validate()?;
    let n = params.n;
    check_capacity(n)?;
    let dim = 1usize << n;
    let nf = n as f64;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let basis = SpinBasisIndex { index: i, n };
        let magnetisation = 2.0 * basis.up_spins() as f64 - nf;
        let mut diag = -magnetisation * magnetisation / (2.0 * nf);
        if let Some(f) = &params.flea {
            diag += flea_bump(basis.up_spins() as f64 / nf, f);
        }
        m[(i, i)] = diag;
        if params.b != 0.0 {
            for site in 0..n {
                m[(i, i ^ (1 << site))] = -params.b;
            }
        }
    }
    Ok(DenseHamiltonian { params: *params, matrix: m })
}

/// Orbits of the permutation group on configurations, with the
/// normalisation `1/sqrt(C(N,k))` of each symmetric basis vector.
#[derive(Debug, Clone)]
pub struct SymmetricSubspaceMap {
    n: usize,
    orbits: Vec<Vec<usize>>,
    norms: Vec<f64>,
}

impl SymmetricSubspaceMap {
    pub fn new(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let mut orbits = vec![Vec::new(); n + 1];
        for i in 0..1usize << n {
            orbits[i.count_ones() as usize].push(i);
        }
        let norms = orbits.iter().map(|o| 1.0 / (o.len() as f64).sqrt()).collect();
        Ok(Self { n, orbits, norms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn orbit(&self, k: usize) -> &[usize] {
        &self.orbits[k]
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.orbits.iter().map(Vec::len).collect()
    }

    pub fn lift(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.n + 1 {
            return Err(Error::Dimension { expected: self.n + 1, got: coeffs.len() });
        }
        let mut v = vec![0.0; self.dim()];
        for ((orbit, &c), &w) in self.orbits.iter().zip(coeffs).zip(&self.norms) {
            for &i in orbit {
                v[i] = c * w;
            }
        }
        Ok(v)
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: v.len() });
        }
        Ok(self.orbits.iter().zip(&self.norms).map(|(orbit, &w)| w * orbit.iter().map(|&i| v[i]).sum::<f64>()).collect())
    }

    /// Reorder coefficients from tridiagonal order (`n+ = 0..=N`) to orbit
    /// order (`k = N - n+`). The map is its own inverse.
    pub fn from_tridiag_order(coeffs: &[f64]) -> Vec<f64> {
        coeffs.iter().rev().copied().collect()
    }

    /// `||v - lift(project(v))||`.
    pub fn symmetric_defect(&self, v: &[f64]) -> Result<f64> {
        let back = self.lift(&self.project(v)?)?;
        Ok(v.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
    }
}

pub fn symmetrize_lift(coeffs: &[f64], map: &SymmetricSubspaceMap) -> Result<Vec<f64>> {
    map.lift(coeffs)
}

pub fn project_symmetric(v: &[f64], map: &SymmetricSubspaceMap) -> Result<Vec<f64>> {
    map.project(v)
}

/// Outcome of the entrywise sign check on `-h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonNegativity {
    pub holds: bool,
    /// `(row, col, value of -h)` at the first negative entry in row-major order.
    pub first_violation: Option<(usize, usize, f64)>,
}

pub fn check_nonnegative(m: &DenseHamiltonian) -> NonNegativity {
    let a = m.matrix();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = -a[(i, j)];
            if v < 0.0 {
                return NonNegativity { holds: false, first_violation: Some((i, j, v)) };
            }
        }
    }
    NonNegativity { holds: true, first_violation: None }
}

/// Strong connectivity of the digraph with an edge wherever the matrix is
/// non-zero. The pattern is symmetric, so one breadth-first search from
/// vertex 0 decides it.
pub fn check_irreducible(m: &DenseHamiltonian) -> bool {
    let n = m.dim();
    if n <= 1 {
        return true;
    }
    let a = m.matrix();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && j != i && (a[(i, j)] != 0.0 || a[(j, i)] != 0.0) {
                seen[j] = true;
                reached += 1;
                queue.push_back(j);
            }
        }
    }
    reached == n
}

/// Eigenvalues (ascending) and the matching unit eigenvectors of a dense matrix.
/// `eigenvalues.len() == eigenvectors.len()` always holds.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Full symmetric eigendecomposition.
pub fn dense_eig(m: &DenseHamiltonian) -> Result<DenseSpectrum> {
    if m.dim() > 1 << MAX_DENSE_SITES {
        return Err(Error::Capacity { n: m.dim().trailing_zeros() as usize, max: MAX_DENSE_SITES });
    }
    let eig = SymmetricEigen::try_new(m.matrix().clone(), f64::EPSILON, 0).ok_or_else(|| Error::Solver {
        iterations: 0,
        reason: "dense symmetric eigensolver did not converge".into(),
    })?;
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| {
            let mut v = eig.eigenvectors.column(i).iter().copied().collect::<Vec<_>>();
            crate::eigen::fix_sign(&mut v);
            v
        })
        .collect();
    Ok(DenseSpectrum { eigenvalues, eigenvectors })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lowest `k` eigenpairs by Lanczos with full reorthogonalisation, one pair
/// at a time in the orthogonal complement of the pairs already found. The
/// deflation keeps multiplicities visible: a repeated eigenvalue shows up again.
/// A pair whose true residual is not yet small is refined by restarting from
/// its Ritz vector, and the pairs found so far are re-rotated by Rayleigh-Ritz
/// so that leakage between close eigenvalues does not accumulate.
pub fn dense_lowest(m: &DenseHamiltonian, k: usize) -> Result<DenseSpectrum> {
    let dim = m.dim();
    if k == 0 || k > dim {
        return Err(Error::param(format!("requested {k} eigenpairs of a {dim}-dimensional matrix")));
    }
    let rows = m.sparse_rows();
    let apply = |v: &[f64]| -> Vec<f64> { rows.iter().map(|r| r.iter().map(|&(j, a)| a * v[j]).sum()).collect() };
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let accept = 1e-10 * norm;

    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for target in 0..k {
        let mut start: Vec<f64> =
            (0..dim).map(|i| ((i as f64 + 1.0) * 0.754_877_666 + target as f64 * 0.31).sin()).collect();
        let mut best = None;
        for _ in 0..LANCZOS_RESTARTS {
            let (lambda, v, steps) = lanczos_min(&apply, &found, &start, 1e-11 * norm, dim)?;
            let res = residual_norm(&apply(&v), &v, lambda);
            best = Some((lambda, v.clone(), res, steps));
            if res <= accept {
                break;
            }
            start = v;
        }
        let (lambda, v, res, steps) = best.expect("at least one Lanczos run");
        if res > 1e-9 * norm {
            return Err(Error::Solver {
                iterations: steps,
                reason: format!("Lanczos residual {res:e} for eigenpair {target}"),
            });
        }
        values.push(lambda);
        found.push(v);
        rayleigh_ritz(&apply, &mut found, &mut values);
    }
    for v in found.iter_mut() {
        crate::eigen::fix_sign(v);
    }
    Ok(DenseSpectrum { eigenvalues: values, eigenvectors: found })
}

const LANCZOS_RESTARTS: usize = 8;

fn residual_norm(hv: &[f64], v: &[f64], lambda: f64) -> f64 {
    hv.iter().zip(v).map(|(h, x)| (h - lambda * x).powi(2)).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in against {
            let p = dot(v, u);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
        }
    }
}

/// Lowest Ritz pair of the Krylov space grown from `start` in the orthogonal
/// complement of `found`. Returns `(lambda, unit vector, steps)`.
fn lanczos_min<F: Fn(&[f64]) -> Vec<f64>>(
    apply: &F,
    found: &[Vec<f64>],
    start: &[f64],
    tol: f64,
    dim: usize,
) -> Result<(f64, Vec<f64>, usize)> {
    let max_steps = (dim - found.len()).min(400);
    let mut q = start.to_vec();
    orthogonalize(&mut q, found);
    let qn = dot(&q, &q).sqrt();
    if qn == 0.0 {
        return Err(Error::Solver { iterations: 0, reason: "Lanczos start vector vanished".into() });
    }
    q.iter_mut().for_each(|x| *x /= qn);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for step in 0..max_steps {
        let mut w = apply(&basis[step]);
        alpha.push(dot(&w, &basis[step]));
        orthogonalize(&mut w, found);
        orthogonalize(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        let steps = alpha.len();
        let exhausted = b < tol || steps == max_steps;
        if steps % 8 == 0 || exhausted {
            let t = DMatrix::from_fn(steps, steps, |i, j| match i.abs_diff(j) {
                0 => alpha[i],
                1 => beta[i.min(j)],
                _ => 0.0,
            });
            let eig = SymmetricEigen::new(t);
            let (imin, &lmin) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty Krylov space");
            let y = eig.eigenvectors.column(imin);
            if b * y[steps - 1].abs() <= tol || exhausted {
                let mut v = vec![0.0; dim];
                for (c, qv) in y.iter().zip(&basis) {
                    v.iter_mut().zip(qv).for_each(|(x, z)| *x += c * z);
                }
                orthogonalize(&mut v, found);
                let nv = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= nv);
                return Ok((lmin, v, steps));
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    unreachable!("the loop returns once the step budget is exhausted")
}

/// Replace `vectors` by the Ritz vectors of their span.
fn rayleigh_ritz<F: Fn(&[f64]) -> Vec<f64>>(apply: &F, vectors: &mut Vec<Vec<f64>>, values: &mut Vec<f64>) {
    let k = vectors.len();
    if k < 2 {
        return;
    }
    let hv: Vec<Vec<f64>> = vectors.iter().map(|v| apply(v)).collect();
    let small = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&vectors[i], &hv[j]) + dot(&vectors[j], &hv[i])));
    let eig = SymmetricEigen::new(small);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let dim = vectors[0].len();
    let rotated: Vec<Vec<f64>> = order
        .iter()
        .map(|&c| {
            let mut out = vec![0.0; dim];
            for (i, v) in vectors.iter().enumerate() {
                let w = eig.eigenvectors[(i, c)];
                out.iter_mut().zip(v).for_each(|(o, x)| *o += w * x);
            }
            out
        })
        .collect();
    *values = order.iter().map(|&c| eig.eigenvalues[c]).collect();
    *vectors = rotated;
}

/// Result of checking the Perron-Frobenius conclusions on a computed ground state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronFrobeniusReport {
    pub nonnegative: bool,
    pub irreducible: bool,
    pub preconditions_met: bool,
    pub ground_energy: f64,
    /// `(lambda_1 - lambda_0) / max(||h||, 1)`.
    pub relative_gap: f64,
    pub simple: bool,
    pub min_component: f64,
    pub strictly_positive: bool,
    pub symmetric_defect: f64,
    pub in_symmetric_subspace: bool,
    /// Explanation when a check could not be evaluated.
    pub note: Option<String>,
}

impl PerronFrobeniusReport {
    pub fn passed(&self) -> bool {
        self.preconditions_met && self.simple && self.strictly_positive && self.in_symmetric_subspace
    }
}

/// Check simplicity, positivity and permutation symmetry of the ground state
/// in `spectrum` (which must hold at least the two lowest eigenvalues and
/// the ground vector).
pub fn perron_frobenius_verify(m: &DenseHamiltonian, spectrum: &DenseSpectrum) -> PerronFrobeniusReport {
    let nonneg = check_nonnegative(m);
    let irreducible = check_irreducible(m);
    let preconditions_met = nonneg.holds && irreducible;
    let mut report = PerronFrobeniusReport {
        nonnegative: nonneg.holds,
        irreducible,
        preconditions_met,
        ground_energy: f64::NAN,
        relative_gap: f64::NAN,
        simple: false,
        min_component: f64::NAN,
        strictly_positive: false,
        symmetric_defect: f64::NAN,
        in_symmetric_subspace: false,
        note: None,
    };
    if !preconditions_met {
        report.note = Some(match nonneg.first_violation {
            Some((i, j, v)) if !irreducible => {
                format!("-h has negative entry {v:e} at ({i}, {j}) and its digraph is not strongly connected")
            }
            Some((i, j, v)) => format!("-h has negative entry {v:e} at ({i}, {j})"),
            None => "digraph of h is not strongly connected".into(),
        });
    }
    if spectrum.eigenvalues.len() < 2 || spectrum.eigenvectors.is_empty() || spectrum.eigenvectors[0].len() != m.dim() {
        report.note = Some("spectrum must contain two eigenvalues and the ground vector".into());
        return report;
    }
    let scale = m.norm().max(1.0);
    report.ground_energy = spectrum.eigenvalues[0];
    report.relative_gap = (spectrum.eigenvalues[1] - spectrum.eigenvalues[0]) / scale;
    report.simple = report.relative_gap > SIMPLICITY_TOL;
    let mut v = spectrum.eigenvectors[0].clone();
    crate::eigen::fix_sign(&mut v);
    report.min_component = v.iter().copied().fold(f64::INFINITY, f64::min);
    report.strictly_positive = report.min_component > 0.0;
    match SymmetricSubspaceMap::new(m.params.n).and_then(|map| {
        if map.dim() == m.dim() {
            map.symmetric_defect(&v)
        } else {
            Err(Error::Dimension { expected: map.dim(), got: m.dim() })
        }
    }) {
        Ok(d) => {
            report.symmetric_defect = d;
            report.in_symmetric_subspace = d <= 1e-8;
        }
        Err(e) => report.note = Some(e.to_string()),
    }
    report
}

/// `P^T h P` on the symmetric subspace (orbit order) together with the
/// invariance defect `||hP - P (P^T h P)||_F`.
pub fn restrict_to_symmetric(m: &DenseHamiltonian, map: &SymmetricSubspaceMap) -> Result<(DMatrix<f64>, f64)> {
    if map.dim() != m.dim() {
        return Err(Error::Dimension { expected: map.dim(), got: m.dim() });
    }
    let k = map.n() + 1;
    let mut columns = Vec::with_capacity(k);
    for c in 0..k {
        let mut e = vec![0.0; k];
        e[c] = 1.0;
        columns.push(map.lift(&e)?);
    }
    let p = DMatrix::from_fn(m.dim(), k, |i, j| columns[j][i]);
    let hp = m.matrix() * &p;
    let restricted = p.transpose() * &hp;
    let defect = (&hp - &p * &restricted).norm();
    Ok((restricted, defect))
}

/// Eigenvalues of `h` on the symmetric subspace, with the invariance defect.
pub fn symmetric_sector_spectrum(m: &DenseHamiltonian) -> Result<(Vec<f64>, f64)> {
    let map = SymmetricSubspaceMap::new(m.params.n)?;
    let (r, defect) = restrict_to_symmetric(m, &map)?;
    let mut ev: Vec<f64> = SymmetricEigen::new(r).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok((ev, defect))
}
