use serde::{Deserialize, Serialize};

/// Two-level caricature of a symmetric double well: tunnelling amplitude
/// `-split/2` between the wells plus a flea raising the second well by `flea`,
///
/// ```text
/// [ 0        -split/2 ]
/// [ -split/2  flea    ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelModel {
    /// Tunnelling splitting of the unperturbed pair.
    pub split: f64,
    /// Flea strength.
    pub flea: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelEigen {
    pub e_minus: f64,
    pub e_plus: f64,
    pub psi_minus: [f64; 2],
    pub psi_plus: [f64; 2],
}

impl TwoLevelModel {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[0.0, -0.5 * self.split], [-0.5 * self.split, self.flea]]
    }

    /// Closed-form eigenpairs, `E_+- = (flea +- sqrt(flea^2 + split^2)) / 2`.
    /// Vectors are unit length with their largest entry positive.
    pub fn eigen(&self) -> TwoLevelEigen {
        let (split, flea) = (self.split, self.flea);
        let root = flea.hypot(split);
        let e_minus = 0.5 * (flea - root);
        let e_plus = 0.5 * (flea + root);
        let (psi_minus, psi_plus) = if root == 0.0 {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            ([r, r], [r, -r])
        } else if flea >= 0.0 {
            (unit([flea + root, split]), unit([-split, flea + root]))
        } else {
            // Avoid cancellation in flea + root when the flea is negative.
            (unit([split, root - flea]), unit([root - flea, -split]))
        };
        TwoLevelEigen { e_minus, e_plus, psi_minus: signed(psi_minus), psi_plus: signed(psi_plus) }
    }
}

pub fn two_level(split: f64, flea: f64) -> TwoLevelEigen {
    TwoLevelModel { split, flea }.eigen()
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn signed(v: [f64; 2]) -> [f64; 2] {
    let lead = if v[0].abs() >= v[1].abs() * (1.0 - 1e-12) { v[0] } else { v[1] };
    if lead < 0.0 {
        [-v[0], -v[1]]
    } else {
        v
    }
}
