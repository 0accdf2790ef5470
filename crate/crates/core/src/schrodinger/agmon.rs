use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::grid::GridMap;
use super::potential::{potential_limit, potential_minima_limit};
use crate::error::{Error, Result};
use crate::model::FleaParams;
use crate::quadrature::integrate;

const AGMON_TOL: f64 = 1e-8;
const NEGATIVE_SLACK: f64 = 1e-12;
/// Relative difference below which both wells are equally far from the flea.
const SIDE_TIE: f64 = 1e-9;

/// Agmon distance `|int_x^y sqrt(V(s)) ds|`. `V` must be shifted to be
/// non-negative on the interval.
pub fn agmon_distance<F: Fn(f64) -> f64>(v: F, x: f64, y: f64) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let worst = Cell::new(0.0f64);
    let value = integrate(
        |s| {
            let p = v(s);
            if p < worst.get() {
                worst.set(p);
            }
            p.max(0.0).sqrt()
        },
        x.min(y),
        x.max(y),
        AGMON_TOL,
    )?;
    if worst.get() < -NEGATIVE_SLACK {
        return Err(Error::domain(format!(
            "potential reaches {:e} on [{x}, {y}]; shift it to a zero minimum first",
            worst.get()
        )));
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalizationRegime {
    /// `d0 <= d1 <= d2`.
    NoLocalization,
    /// `d1 < d0 <= d2`.
    LocalizeFarMinimum,
    /// `d1 <= d2 < d0`.
    LocalizeFarMinimumStrong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WellSide {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgmonReport {
    /// Distance between the minima.
    pub d0: f64,
    /// Twice the distance from the support to the nearer minimum.
    pub d1: f64,
    /// Twice the distance from the support to the farther minimum.
    pub d2: f64,
    pub regime: LocalizationRegime,
    /// Well the ground state is expected to settle in, if it localizes.
    pub predicted_side: Option<WellSide>,
}

/// Agmon classification of a positive flea supported on `support` for a
/// double well with minima `m1 < m2` where `v` vanishes.
pub fn classify_flea_regime<F: Fn(f64) -> f64>(v: F, support: (f64, f64), m1: f64, m2: f64) -> Result<AgmonReport> {
    let (lo, hi) = support;
    if m1.is_nan() || m2.is_nan() || m1 >= m2 || lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::param("need m1 < m2 and lo <= hi for the support"));
    }
    if (lo..=hi).contains(&m1) || (lo..=hi).contains(&m2) {
        return Err(Error::domain("flea must vanish near minima: its support contains a minimum of V"));
    }
    let to_support = |m: f64| -> Result<f64> {
        if hi < m {
            agmon_distance(&v, hi, m)
        } else {
            agmon_distance(&v, m, lo)
        }
    };
    let d0 = agmon_distance(&v, m1, m2)?;
    let left = to_support(m1)?;
    let right = to_support(m2)?;
    let d1 = 2.0 * left.min(right);
    let d2 = 2.0 * left.max(right);
    // Distances carry the quadrature tolerance; equality cases must not be
    // decided by rounding.
    let slack = AGMON_TOL * d0.max(1.0);
    let regime = if d1 >= d0 - slack {
        LocalizationRegime::NoLocalization
    } else if d0 <= d2 + slack {
        LocalizationRegime::LocalizeFarMinimum
    } else {
        LocalizationRegime::LocalizeFarMinimumStrong
    };
    let tie = (left - right).abs() <= SIDE_TIE * left.max(right);
    let predicted_side = match regime {
        LocalizationRegime::NoLocalization => None,
        _ if tie => None,
        _ if left > right => Some(WellSide::Left),
        _ => Some(WellSide::Right),
    };
    Ok(AgmonReport { d0, d1, d2, regime, predicted_side })
}

/// Classify a Curie-Weiss flea using the limit double well expressed in the
/// uniform coordinate `y = D(x)/L`, so that `d_V = int sqrt(V(x)) d(x)/L dx`.
pub fn cw_flea_regime(flea: &FleaParams, grid: &GridMap) -> Result<AgmonReport> {
    let b = grid.field();
    let (minima, vmin) = potential_minima_limit(b);
    if minima.len() != 2 {
        return Err(Error::domain(format!("B = {b} gives a single well; nothing to localize between")));
    }
    let length = grid.length();
    let weighted = |x: f64| {
        let w = grid.spacing(x).unwrap_or(f64::INFINITY) / length;
        (potential_limit(x, b) - vmin) * w * w
    };
    let (lo, hi) = flea.support();
    classify_flea_regime(weighted, (lo.max(0.0), hi.min(1.0)), minima[0], minima[1])
}
