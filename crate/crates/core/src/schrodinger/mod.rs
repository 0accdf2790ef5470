//! The double-well Schrodinger operator hiding in the tridiagonal matrix.
//!
//! `J_{N+1}/N` behaves like a non-uniform discretisation, with grid spacing
//! `d(x)/N`, of `-(1/N^2) d^2/dz^2 + V_N` on `[0, L]`. Mapping `z = D(x)` to
//! `y = z / L` gives a uniform discretisation `K_N + V~_N` on `[0, 1]`.

mod agmon;
mod grid;
mod potential;
mod two_level;

pub use agmon::{agmon_distance, classify_flea_regime, cw_flea_regime, AgmonReport, LocalizationRegime, WellSide};
pub use grid::{grid_spacing, GridMap};
pub use potential::{
    build_schrodinger_tridiag, potential_limit, potential_minima_limit, potential_vn, recover_grid_spacing,
    PotentialProfile, StencilPoint,
};
pub use two_level::{two_level, TwoLevelEigen, TwoLevelModel};
