//! Randomised invariant checks shared by the property tests and the
//! acceptance run.

#![allow(dead_code)]

use cwlab_core::analysis::localization_report;
use cwlab_core::schrodinger::{potential_limit, potential_minima_limit, two_level, GridMap};
use cwlab_core::spin::{build_dense_cw, SymmetricSubspaceMap};
use cwlab_core::{
    build_hamiltonian, build_tridiag_cw, eig_full, eig_full_with, eig_lowest, sturm_count, ClusterPolicy,
    FleaParams, ModelParams, TridiagonalMatrix,
};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub struct Property {
    pub name: &'static str,
    pub cases: u32,
    run: fn(&mut TestRunner) -> Result<(), String>,
}

impl Property {
    pub fn check(&self) -> Result<(), String> {
        let mut config = Config::with_cases(self.cases);
        config.failure_persistence = None;
        let mut runner = TestRunner::new(config);
        (self.run)(&mut runner)
    }
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn close(a: f64, b: f64, tol: f64) -> Result<(), TestCaseError> {
    prop_assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
    Ok(())
}

fn random_tridiag(max: usize) -> impl Strategy<Value = TridiagonalMatrix> {
    (1..=max).prop_flat_map(|n| {
        (prop::collection::vec(-5.0..5.0f64, n), prop::collection::vec(-3.0..3.0f64, n - 1))
            .prop_map(|(d, e)| TridiagonalMatrix::new(d, e).unwrap())
    })
}

fn dense_eigenvalues(m: &TridiagonalMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.to_dense()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn properties() -> Vec<Property> {
    vec![
        Property {
            name: "orbit sizes are binomial and partition 2^N",
            cases: 60,
            run: |r| {
                report(r.run(&(1usize..=12), |n| {
                    let map = SymmetricSubspaceMap::new(n).unwrap();
                    let sizes = map.orbit_sizes();
                    prop_assert_eq!(sizes.iter().sum::<usize>(), 1 << n);
                    let mut binom = 1usize;
                    for (k, &s) in sizes.iter().enumerate() {
                        prop_assert_eq!(s, binom);
                        binom = binom * (n - k) / (k + 1);
                    }
                    Ok(())
                }))
            },
        },
        Property {
            name: "lift is an isometry and project inverts it",
            cases: 150,
            run: |r| {
                let strat = (1usize..=10).prop_flat_map(|n| prop::collection::vec(-1.0..1.0f64, n + 1));
                report(r.run(&strat, |c| {
                    let map = SymmetricSubspaceMap::new(c.len() - 1).unwrap();
                    let v = map.lift(&c).unwrap();
                    close(dot(&v, &v), dot(&c, &c), 1e-12)?;
                    let back = map.project(&v).unwrap();
                    for (a, b) in back.iter().zip(&c) {
                        close(*a, *b, 1e-12)?;
                    }
                    prop_assert!(map.symmetric_defect(&v).unwrap() < 1e-12);
                    Ok(())
                }))
            },
        },
        Property {
            name: "orbit-diagonal flea commutes with the lift",
            cases: 40,
            run: |r| {
                let strat = (2usize..=8).prop_flat_map(|n| {
                    (Just(n), 0..=n, 0.05..0.5f64, 0.0..2.0f64, prop::collection::vec(-1.0..1.0f64, n + 1))
                });
                report(r.run(&strat, |(n, idx, c, d, coeffs)| {
                    let flea = FleaParams::grid_aligned(n, idx, c, d).unwrap();
                    let plain = ModelParams::new(n, 0.5).unwrap();
                    let dense = build_dense_cw(&plain.with_flea(flea)).unwrap();
                    let dense0 = build_dense_cw(&plain).unwrap();
                    let map = SymmetricSubspaceMap::new(n).unwrap();
                    let lifted = map.lift(&coeffs).unwrap();
                    let flea_dense: Vec<f64> = dense
                        .apply(&lifted)
                        .iter()
                        .zip(dense0.apply(&lifted))
                        .map(|(a, b)| a - b)
                        .collect();
                    // Orbit k holds n+ = N - k up spins.
                    let on_orbits: Vec<f64> = coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * cwlab_core::flea_bump((n - k) as f64 / n as f64, &flea))
                        .collect();
                    let expected = map.lift(&on_orbits).unwrap();
                    for (a, b) in flea_dense.iter().zip(&expected) {
                        close(*a, *b, 1e-12)?;
                    }
                    Ok(())
                }))
            },
        },
        Property {
            name: "unperturbed J is mirror symmetric with non-positive off-diagonal",
            cases: 150,
            run: |r| {
                report(r.run(&(1usize..400, 0.0..3.0f64), |(n, b)| {
                    let j = build_tridiag_cw(&ModelParams::new(n, b).unwrap()).unwrap();
                    prop_assert!(j.is_mirror_symmetric(0.0));
                    prop_assert!(j.off().iter().all(|&e| e <= 0.0));
                    Ok(())
                }))
            },
        },
        Property {
            name: "an off-centre flea breaks mirror symmetry",
            cases: 100,
            run: |r| {
                let strat = (4usize..200).prop_flat_map(|n| (Just(n), 0..=n, 0.1..2.0f64));
                report(r.run(&strat, |(n, idx, d)| {
                    prop_assume!(2 * idx != n);
                    let flea = FleaParams::grid_aligned(n, idx, 1.5 / n as f64, d).unwrap();
                    let h = build_hamiltonian(&ModelParams::new(n, 0.5).unwrap().with_flea(flea)).unwrap();
                    prop_assert!(!h.is_mirror_symmetric(1e-12));
                    Ok(())
                }))
            },
        },
        Property {
            name: "Sturm count matches the number of eigenvalues below the probe",
            cases: 150,
            run: |r| {
                report(r.run(&(random_tridiag(60), -12.0..12.0f64), |(m, mu)| {
                    let ev = dense_eigenvalues(&m);
                    prop_assume!(ev.iter().all(|&l| (l - mu).abs() > 1e-9));
                    prop_assert_eq!(sturm_count(&m, mu), ev.iter().filter(|&&l| l < mu).count());
                    Ok(())
                }))
            },
        },
        Property {
            name: "eigenvalues agree with a dense solver",
            cases: 60,
            run: |r| {
                report(r.run(&random_tridiag(200), |m| {
                    let ours = eig_lowest(&m, m.len(), false).unwrap().eigenvalues;
                    let tol = 1e-11 * m.norm().max(1.0);
                    for (a, b) in ours.iter().zip(dense_eigenvalues(&m)) {
                        close(*a, b, tol)?;
                    }
                    Ok(())
                }))
            },
        },
        Property {
            name: "eigenvectors are orthonormal with small residuals",
            cases: 60,
            run: |r| {
                report(r.run(&random_tridiag(80), |m| {
                    let s = eig_full(&m).unwrap();
                    let vs = s.eigenvectors.as_ref().unwrap();
                    for i in 0..vs.len() {
                        close(dot(&vs[i], &vs[i]), 1.0, 1e-12)?;
                        for j in 0..i {
                            prop_assert!(dot(&vs[i], &vs[j]).abs() <= 1e-10, "<v{i}, v{j}>");
                        }
                    }
                    let tol = 1e-11 * (m.norm() + 1.0) * 10.0;
                    prop_assert!(s.residuals.iter().all(|&x| x <= tol));
                    Ok(())
                }))
            },
        },
        Property {
            name: "symmetrized eigenvectors of J are even or odd",
            cases: 40,
            run: |r| {
                report(r.run(&(2usize..120, 0.05..2.0f64), |(n, b)| {
                    let j = build_tridiag_cw(&ModelParams::new(n, b).unwrap()).unwrap();
                    let s = eig_full_with(&j, ClusterPolicy::Symmetrized).unwrap();
                    for v in s.eigenvectors.unwrap() {
                        let even: f64 = v.iter().zip(v.iter().rev()).map(|(a, b)| (a - b).powi(2)).sum();
                        let odd: f64 = v.iter().zip(v.iter().rev()).map(|(a, b)| (a + b).powi(2)).sum();
                        prop_assert!(even.min(odd).sqrt() < 1e-8, "parity defect {}", even.min(odd).sqrt());
                    }
                    Ok(())
                }))
            },
        },
        Property {
            name: "localization masses partition the norm",
            cases: 150,
            run: |r| {
                let strat = (1usize..300).prop_flat_map(|n| prop::collection::vec(-1.0..1.0f64, n + 1));
                report(r.run(&strat, |v| {
                    let norm = dot(&v, &v).sqrt();
                    prop_assume!(norm > 1e-6);
                    let v: Vec<f64> = v.iter().map(|x| x / norm).collect();
                    let rep = localization_report(&v, v.len() - 1).unwrap();
                    close(rep.left_mass + rep.right_mass + rep.mid_mass, 1.0, 1e-13)?;
                    prop_assert!(rep.magnetization.abs() <= 1.0 + 1e-13);
                    Ok(())
                }))
            },
        },
        Property {
            name: "mirroring the flea mirrors the localization report",
            cases: 40,
            run: |r| {
                let strat = (6usize..80).prop_flat_map(|n| (Just(n), 0..=n, 0.05..1.0f64, 0.3..0.9f64));
                report(r.run(&strat, |(n, idx, d, b)| {
                    let flea = FleaParams::grid_aligned(n, idx, 2.0 / n as f64, d).unwrap();
                    let mirror = FleaParams::grid_aligned(n, n - idx, 2.0 / n as f64, d).unwrap();
                    let ground = |f: FleaParams| {
                        let h = build_hamiltonian(&ModelParams::new(n, b).unwrap().with_flea(f)).unwrap();
                        let s = eig_lowest(&h, 2, true).unwrap();
                        (s.eigenvalues[1] - s.eigenvalues[0], s.eigenvectors.unwrap().swap_remove(0))
                    };
                    let (gap, v) = ground(flea);
                    prop_assume!(gap > 1e-6);
                    let (_, w) = ground(mirror);
                    let a = localization_report(&v, n).unwrap();
                    let c = localization_report(&w, n).unwrap();
                    close(a.left_mass, c.right_mass, 1e-8)?;
                    close(a.right_mass, c.left_mass, 1e-8)?;
                    close(a.magnetization, -c.magnetization, 1e-8)?;
                    Ok(())
                }))
            },
        },
        Property {
            name: "D and its inverse round-trip",
            cases: 100,
            run: |r| {
                report(r.run(&(0.05..3.0f64, 0.0..=1.0f64), |(b, x)| {
                    let g = GridMap::new(b).unwrap();
                    let z = g.interval_coordinate(x).unwrap();
                    close(g.inverse(z).unwrap(), x, 1e-8)?;
                    let z2 = x * g.length();
                    close(g.interval_coordinate(g.inverse(z2).unwrap()).unwrap(), z2, 1e-8)?;
                    Ok(())
                }))
            },
        },
        Property {
            name: "limit potential minima match a grid search",
            cases: 60,
            run: |r| {
                report(r.run(&(0.0..2.5f64), |b| {
                    let (minima, value) = potential_minima_limit(b);
                    let grid: Vec<f64> = (0..=20000).map(|i| potential_limit(i as f64 / 20000.0, b)).collect();
                    let best = grid.iter().copied().fold(f64::INFINITY, f64::min);
                    close(best, value, 1e-6)?;
                    let local: Vec<usize> = (1..grid.len() - 1)
                        .filter(|&i| grid[i] <= grid[i - 1] && grid[i] < grid[i + 1])
                        .chain([0, grid.len() - 1].into_iter().filter(|&i| grid[i] == best))
                        .collect();
                    if b < 0.99 {
                        prop_assert_eq!(local.len(), 2);
                        for (i, m) in local.iter().zip(&minima) {
                            close(*i as f64 / 20000.0, *m, 2e-3)?;
                        }
                    } else if b > 1.01 {
                        prop_assert_eq!(local.len(), 1);
                        close(local[0] as f64 / 20000.0, 0.5, 1e-4)?;
                    }
                    Ok(())
                }))
            },
        },
        Property {
            name: "two-level trace and determinant",
            cases: 200,
            run: |r| {
                report(r.run(&(0.0..10.0f64, -10.0..10.0f64), |(split, flea)| {
                    let e = two_level(split, flea);
                    let scale = split.abs().max(flea.abs()).max(1.0);
                    close(e.e_minus + e.e_plus, flea, 4.0 * f64::EPSILON * scale)?;
                    close(e.e_minus * e.e_plus, -0.25 * split * split, 8.0 * f64::EPSILON * scale * scale)?;
                    close(dot(&e.psi_minus, &e.psi_plus), 0.0, 1e-15)?;
                    Ok(())
                }))
            },
        },
    ]
}

pub fn property(name: &str) -> Property {
    properties().into_iter().find(|p| p.name == name).unwrap_or_else(|| panic!("no property named {name:?}"))
}
