//! Kinematics of simple shear and the in-plane moduli of an incompressible
//! layer, reduced to the three dimensionless numbers the dispersion problem
//! actually depends on: the shear measure `epsilon`, the modulus combination
//! `delta`, and the normal-stress measure `p_bar`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Principal-axis description of a simple shear.
///
/// The in-plane principal stretches are `lambda` and `1/lambda`; `epsilon`
/// is the amount of shear and `phi` the angle between the greatest principal
/// axis and the direction of shear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearState {
    pub lambda: f64,
    pub epsilon: f64,
    pub phi: f64,
}

/// Builds the shear state for greatest principal stretch `lambda > 0`.
///
/// `epsilon = lambda - 1/lambda`; `phi` satisfies `cot(phi) = lambda`, which
/// keeps `0 < phi < pi/2` and puts `phi` at `pi/4` for zero shear.
pub fn shear_from_stretch(lambda: f64) -> Result<ShearState> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::domain(format!(
            "stretch must be finite and positive, got {lambda}"
        )));
    }
    Ok(ShearState {
        lambda,
        epsilon: lambda - 1.0 / lambda,
        phi: 1.0f64.atan2(lambda),
    })
}

impl ShearState {
    /// Shear state from the amount of shear, inverting
    /// `epsilon = lambda - 1/lambda` for the positive stretch.
    pub fn from_amount(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::domain(format!("shear amount must be finite, got {epsilon}")));
        }
        let lambda = 0.5 * (epsilon + (epsilon * epsilon + 4.0).sqrt());
        shear_from_stretch(lambda)
    }
}

/// Verifies the strong-ellipticity conditions
/// `alpha > 0`, `gamma > 0`, `beta > -sqrt(alpha*gamma)`.
pub fn check_strong_ellipticity(alpha: f64, beta: f64, gamma: f64) -> Result<()> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !v.is_finite() {
            return Err(Error::domain(format!("{name} must be finite, got {v}")));
        }
    }
    if alpha <= 0.0 || gamma <= 0.0 {
        return Err(Error::Admissibility(format!(
            "alpha and gamma must be positive (alpha = {alpha}, gamma = {gamma})"
        )));
    }
    let bound = -(alpha * gamma).sqrt();
    if beta <= bound {
        return Err(Error::Admissibility(format!(
            "beta = {beta} must exceed -sqrt(alpha*gamma) = {bound}"
        )));
    }
    Ok(())
}

/// The dimensionless modulus combination
/// `delta = (alpha + gamma - 2 beta) / (2 (beta + sqrt(alpha*gamma)))`.
///
/// Strong ellipticity guarantees `delta + 1 > 0`.
pub fn delta_param(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_strong_ellipticity(alpha, beta, gamma)?;
    Ok((alpha + gamma - 2.0 * beta) / (2.0 * (beta + (alpha * gamma).sqrt())))
}

/// Dimensionless normal-stress measure `(gamma - sigma2) / sqrt(alpha*gamma)`,
/// where `sigma2` is the normal stress on the layer faces.
pub fn p_bar(gamma: f64, sigma2: f64, alpha: f64) -> Result<f64> {
    check_strong_ellipticity(alpha, 0.0, gamma)?;
    if !sigma2.is_finite() {
        return Err(Error::domain(format!("sigma2 must be finite, got {sigma2}")));
    }
    Ok((gamma - sigma2) / (alpha * gamma).sqrt())
}

/// A propagation speed in both dimensional-free forms: the speed `v` and
/// `zeta = v^2 = rho c^2 / sqrt(alpha*gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSpeed {
    pub v: f64,
    pub zeta: f64,
}

impl WaveSpeed {
    pub fn from_v(v: f64) -> Result<Self> {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::domain(format!("speed must be finite and >= 0, got {v}")));
        }
        Ok(WaveSpeed { v, zeta: v * v })
    }

    pub fn from_zeta(zeta: f64) -> Result<Self> {
        if !zeta.is_finite() || zeta < 0.0 {
            return Err(Error::domain(format!("zeta must be finite and >= 0, got {zeta}")));
        }
        Ok(WaveSpeed { v: zeta.sqrt(), zeta })
    }
}

/// Normalizes a dimensional phase speed `c` against the moduli:
/// `zeta = rho c^2 / sqrt(alpha*gamma)`.
pub fn zeta_from_speed(rho: f64, c: f64, alpha: f64, gamma: f64) -> Result<WaveSpeed> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::domain(format!("density must be positive, got {rho}")));
    }
    if !c.is_finite() || c < 0.0 {
        return Err(Error::domain(format!("speed must be finite and >= 0, got {c}")));
    }
    check_strong_ellipticity(alpha, 0.0, gamma)?;
    WaveSpeed::from_zeta(rho * c * c / (alpha * gamma).sqrt())
}

/// Moduli of the sheared layer together with the derived quantities the
/// dispersion equation uses. `alpha/gamma = lambda^4` ties the moduli to the
/// shear state (plane-strain incompressible isotropy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub p_bar: f64,
    pub shear: ShearState,
}

impl MaterialParams {
    /// Admissible moduli entered directly. The stretch is recovered from
    /// `lambda = (alpha/gamma)^(1/4)`; `p_bar` starts at zero.
    pub fn from_moduli(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let delta = delta_param(alpha, beta, gamma)?;
        let shear = shear_from_stretch((alpha / gamma).powf(0.25))?;
        Ok(MaterialParams {
            alpha,
            beta,
            gamma,
            delta,
            p_bar: 0.0,
            shear,
        })
    }

    /// Same moduli and shear, with `p_bar` replaced.
    pub fn with_p_bar(mut self, p_bar: f64) -> Result<Self> {
        if !p_bar.is_finite() {
            return Err(Error::domain(format!("p_bar must be finite, got {p_bar}")));
        }
        self.p_bar = p_bar;
        Ok(self)
    }

    /// Same moduli and shear, with `p_bar` computed from the face normal
    /// stress `sigma2`.
    pub fn with_sigma2(self, sigma2: f64) -> Result<Self> {
        let pb = p_bar(self.gamma, sigma2, self.alpha)?;
        self.with_p_bar(pb)
    }
}

/// Moduli normalized so `sqrt(alpha*gamma) = 1`, with `2 beta = alpha + gamma`.
/// This makes `delta = 0`, so the mode-speed families collapse to a single
/// material-independent set.
pub fn case_a_params(lambda: f64) -> Result<MaterialParams> {
    let shear = shear_from_stretch(lambda)?;
    let alpha = lambda * lambda;
    let gamma = 1.0 / (lambda * lambda);
    let beta = 0.5 * (alpha + gamma);
    let delta = delta_param(alpha, beta, gamma)?;
    Ok(MaterialParams {
        alpha,
        beta,
        gamma,
        delta,
        p_bar: 0.0,
        shear,
    })
}

/// Moduli normalized so `sqrt(alpha*gamma) = 1`, with `beta = sqrt(alpha*gamma)`.
/// Here `delta = epsilon^2 / 4`, so increasing shear slows every mode family.
pub fn case_b_params(lambda: f64) -> Result<MaterialParams> {
    let shear = shear_from_stretch(lambda)?;
    let alpha = lambda * lambda;
    let gamma = 1.0 / (lambda * lambda);
    let beta = 1.0;
    let delta = delta_param(alpha, beta, gamma)?;
    Ok(MaterialParams {
        alpha,
        beta,
        gamma,
        delta,
        p_bar: 0.0,
        shear,
    })
}
