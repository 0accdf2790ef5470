//! Curie-Weiss quantum spin model in a transverse field, its tridiagonal
//! reduction to the symmetric subspace, and the double-well Schrodinger
//! operator that the reduced matrix discretises.
//!
//! ```
//! use cwlab_core::{build_tridiag_cw, eig_lowest, scale, ModelParams};
//!
//! let params = ModelParams::new(100, 0.5).unwrap();
//! let j = scale(&build_tridiag_cw(&params).unwrap(), 1.0 / 100.0).unwrap();
//! let spectrum = eig_lowest(&j, 2, false).unwrap();
//! assert!((spectrum.eigenvalues[0] + 0.62).abs() < 0.01);
//! ```

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod schrodinger;
pub mod spin;
pub mod tridiag;

pub use eigen::{
    degeneracy_tolerance, eig_full, eig_full_with, eig_lowest, eig_lowest_with, eigenvalues_lowest, splitting,
    sturm_count, ClusterPolicy, Spectrum,
};
pub use error::{Error, Result};
pub use model::{flea_bump, FleaParams, ModelParams};
pub use tridiag::{
    apply_flea, apply_longitudinal_field, build_hamiltonian, build_tridiag_cw, flea_support_indices, scale,
    TridiagonalMatrix,
};

/// Crate version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
