//! Large-speed asymptotics of the dispersion equation: the reduced residual
//! whose zeros are uniformly spaced in speed, and the two closed-form mode
//! families it predicts, with their specializations to the two material
//! classes.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Coefficient triple of the large-speed reduction of the propagation
/// quartic: `a = 1 + delta`, `b = 4*delta + 2 + epsilon^2`,
/// `d = 1 + (1 + delta) * epsilon^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl AsymptoticParams {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !delta.is_finite() || delta + 1.0 <= 0.0 {
            return Err(Error::Admissibility(format!(
                "delta must be finite with delta + 1 > 0, got {delta}"
            )));
        }
        if !epsilon.is_finite() {
            return Err(Error::domain(format!("epsilon must be finite, got {epsilon}")));
        }
        let a = 1.0 + delta;
        Ok(AsymptoticParams {
            a,
            b: 4.0 * delta + 2.0 + epsilon * epsilon,
            d: 1.0 + a * epsilon * epsilon,
        })
    }
}

/// Which of the two uniformly spaced mode families a speed belongs to.
/// Family 1 speeds are twice the family 2 speeds at the same index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Family {
    One,
    Two,
}

impl Family {
    pub fn index(self) -> u8 {
        match self {
            Family::One => 1,
            Family::Two => 2,
        }
    }
}

impl From<Family> for u8 {
    fn from(f: Family) -> u8 {
        f.index()
    }
}

impl TryFrom<u8> for Family {
    type Error = String;
    fn try_from(x: u8) -> std::result::Result<Self, String> {
        match x {
            1 => Ok(Family::One),
            2 => Ok(Family::Two),
            other => Err(format!("family must be 1 or 2, got {other}")),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Whether a speed came from a closed-form prediction or from root search
/// on the exact dispersion equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Asymptotic,
}

/// A dimensionless mode speed `v` (`v^2 = zeta`). Predicted speeds carry
/// their mode index and family; speeds found by exact root search are
/// unclassified until matched to a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpeed {
    pub n: Option<u32>,
    pub family: Option<Family>,
    pub v: f64,
    pub provenance: Provenance,
    /// Set on predictions with fewer than one and a half oscillations across
    /// the thickness (`kh * v * sqrt(a) < 3*pi`), where the large-speed
    /// expansion has no business being accurate.
    pub low_confidence: bool,
}

impl ModeSpeed {
    pub fn exact(v: f64) -> Self {
        ModeSpeed {
            n: None,
            family: None,
            v,
            provenance: Provenance::Exact,
            low_confidence: false,
        }
    }
}

fn check_speed_inputs(n: u32, kh: f64, a: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::domain("mode index n must be >= 1"));
    }
    if !kh.is_finite() || kh <= 0.0 {
        return Err(Error::domain(format!("kh must be finite and > 0, got {kh}")));
    }
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Admissibility(format!("a must be finite and > 0, got {a}")));
    }
    Ok(())
}

/// Leading-order decay exponents at large speed: one pair at `±sqrt(a)`,
/// the other collapsing to zero.
pub fn leading_roots(a: f64) -> Result<[f64; 4]> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Admissibility(format!("a must be finite and > 0, got {a}")));
    }
    let r = a.sqrt();
    Ok([r, -r, 0.0, 0.0])
}

/// Large-speed limit of the dispersion determinant, `1 - exp(-2i*kh*v*sqrt(a))`;
/// its magnitude is `2*|sin(kh*v*sqrt(a))|`, so it vanishes exactly at the
/// family 1 speeds.
pub fn asymptotic_residual(v: f64, kh: f64, a: f64) -> Complex64 {
    let theta = -2.0 * kh * v * a.sqrt();
    Complex64::new(1.0, 0.0) - Complex64::new(0.0, theta).exp()
}

fn predicted(n: u32, family: Family, v: f64) -> ModeSpeed {
    // kh*v*sqrt(a) is n*pi (family 1) or n*pi/2 (family 2) by construction,
    // so the 3*pi confidence threshold reduces to an index test.
    let low_confidence = match family {
        Family::One => n < 3,
        Family::Two => n < 6,
    };
    ModeSpeed {
        n: Some(n),
        family: Some(family),
        v,
        provenance: Provenance::Asymptotic,
        low_confidence,
    }
}

/// Family 1 prediction `v = n*pi / (kh*sqrt(a))`.
pub fn v_family1(n: u32, kh: f64, a: f64) -> Result<ModeSpeed> {
    check_speed_inputs(n, kh, a)?;
    Ok(predicted(n, Family::One, n as f64 * PI / (kh * a.sqrt())))
}

/// Family 2 prediction `v = n*pi / (2*kh*sqrt(a))`.
pub fn v_family2(n: u32, kh: f64, a: f64) -> Result<ModeSpeed> {
    check_speed_inputs(n, kh, a)?;
    Ok(predicted(n, Family::Two, n as f64 * PI / (2.0 * kh * a.sqrt())))
}

pub fn v_family(n: u32, kh: f64, a: f64, family: Family) -> Result<ModeSpeed> {
    match family {
        Family::One => v_family1(n, kh, a),
        Family::Two => v_family2(n, kh, a),
    }
}

/// Mode speeds for the material class with `a = 1`: `n*pi/kh` and
/// `n*pi/(2*kh)`. No material parameter appears, so the predictions are
/// untouched by the amount of shear.
pub fn case_a_speed(n: u32, kh: f64, family: Family) -> Result<ModeSpeed> {
    check_speed_inputs(n, kh, 1.0)?;
    let v = match family {
        Family::One => n as f64 * PI / kh,
        Family::Two => n as f64 * PI / (2.0 * kh),
    };
    Ok(predicted(n, family, v))
}

/// Mode speeds for the `beta = sqrt(alpha*gamma)` class, where
/// `a = 1 + epsilon^2/4`: `2*n*pi/(kh*sqrt(epsilon^2+4))` and
/// `n*pi/(kh*sqrt(epsilon^2+4))`. Speeds shrink as shear grows.
pub fn case_b_speed(n: u32, kh: f64, epsilon: f64, family: Family) -> Result<ModeSpeed> {
    if !epsilon.is_finite() {
        return Err(Error::domain(format!("epsilon must be finite, got {epsilon}")));
    }
    check_speed_inputs(n, kh, 1.0 + epsilon * epsilon / 4.0)?;
    let root = (epsilon * epsilon + 4.0).sqrt();
    let v = match family {
        Family::One => 2.0 * n as f64 * PI / (kh * root),
        Family::Two => n as f64 * PI / (kh * root),
    };
    Ok(predicted(n, family, v))
}
