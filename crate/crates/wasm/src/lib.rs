//! Browser bindings. Every export returns a JSON string so the page needs no
//! generated type glue; errors come back as a plain message.

use cwlab_core::analysis::{localization_report, splitting_curve, LocalizationReport, SplittingPoint};
use cwlab_core::schrodinger::{cw_flea_regime, potential_vn, two_level, AgmonReport, GridMap, TwoLevelEigen};
use cwlab_core::{apply_flea, build_tridiag_cw, eig_lowest_with, flea_bump, ClusterPolicy, FleaParams, ModelParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest N the page may request; keeps a slider drag responsive.
pub const MAX_N: usize = 4000;

#[derive(Debug, Serialize)]
pub struct GroundStateView {
    pub x: Vec<f64>,
    /// `V_N + flea/N` minus its grid minimum.
    pub potential: Vec<f64>,
    /// Eigenvalues of the scaled matrix `H/N`.
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub localization: Vec<LocalizationReport>,
    pub agmon: Option<AgmonReport>,
}

fn flea(b: f64, c: f64, d: f64) -> Result<Option<FleaParams>, String> {
    if d == 0.0 {
        return Ok(None);
    }
    FleaParams::new(b, c, d).map(Some).map_err(|e| e.to_string())
}

pub fn ground_state_view(
    n: usize,
    b: f64,
    flea_b: f64,
    flea_c: f64,
    flea_d: f64,
    levels: usize,
) -> Result<GroundStateView, String> {
    if n > MAX_N {
        return Err(format!("N is limited to {MAX_N} in the browser"));
    }
    let f = flea(flea_b, flea_c, flea_d)?;
    let mut h = build_tridiag_cw(&ModelParams::new(n, b).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if let Some(f) = &f {
        h = apply_flea(&h, f, n).map_err(|e| e.to_string())?;
    }
    let spec = eig_lowest_with(&h, levels.clamp(1, n + 1), true, ClusterPolicy::Symmetrized).map_err(|e| e.to_string())?;
    let states = spec.eigenvectors.unwrap_or_default();
    let nf = n as f64;
    let x: Vec<f64> = (0..=n).map(|i| i as f64 / nf).collect();
    let raw: Vec<f64> =
        x.iter().map(|&x| potential_vn(x, n, b) + f.as_ref().map_or(0.0, |f| flea_bump(x, f) / nf)).collect();
    let vmin = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let localization = states.iter().map(|v| localization_report(v, n)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let agmon = match &f {
        Some(f) => GridMap::new(b).ok().and_then(|g| cw_flea_regime(f, &g).ok()),
        None => None,
    };
    Ok(GroundStateView {
        x,
        potential: raw.iter().map(|v| v - vmin).collect(),
        energies: spec.eigenvalues.iter().map(|e| e / nf).collect(),
        states,
        localization,
        agmon,
    })
}

pub fn splitting_points(b: f64, n_max: usize, step: usize) -> Result<Vec<SplittingPoint>, String> {
    if step == 0 || n_max < step || n_max > MAX_N {
        return Err(format!("need 0 < step <= N max <= {MAX_N}"));
    }
    let ns: Vec<usize> = (step..=n_max).step_by(step).collect();
    splitting_curve(b, &ns).map(|c| c.points).map_err(|e| e.to_string())
}

pub fn two_level_view(split: f64, flea: f64) -> Result<TwoLevelEigen, String> {
    if !split.is_finite() || !flea.is_finite() {
        return Err("parameters must be finite".into());
    }
    Ok(two_level(split, flea))
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

/// Lowest `levels` eigenvectors of `J_{N+1}` plus an optional flea (`flea_d = 0` disables it).
#[wasm_bindgen]
pub fn ground_state(n: usize, b: f64, flea_b: f64, flea_c: f64, flea_d: f64, levels: usize) -> Result<String, JsValue> {
    to_js(ground_state_view(n, b, flea_b, flea_c, flea_d, levels))
}

/// Gap of the two lowest eigenvalues of `J_{N+1}` for `N = step, 2 step, .., n_max`.
#[wasm_bindgen]
pub fn splitting(b: f64, n_max: usize, step: usize) -> Result<String, JsValue> {
    to_js(splitting_points(b, n_max, step))
}

/// Eigenpairs of the double-well caricature `[[0, -split/2], [-split/2, flea]]`.
#[wasm_bindgen]
pub fn two_level_model(split: f64, flea: f64) -> Result<String, JsValue> {
    to_js(two_level_view(split, flea))
}
