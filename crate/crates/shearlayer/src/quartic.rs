//! The quartic that governs the through-thickness decay exponents `s` of a
//! partial wave, in both of its equivalent forms, plus a solver that labels
//! the four roots as two barred/unbarred pairs.

use crate::error::{Error, Result};
use crate::material::check_strong_ellipticity;
use nalgebra::Matrix4;
use num_complex::Complex64;

/// Monic quartic `c4 s^4 + c3 s^3 + c2 s^2 + c1 s + c0` with `c4 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub c4: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuarticCoeffs {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        (((Complex64::new(self.c4, 0.0) * s + self.c3) * s + self.c2) * s + self.c1) * s + self.c0
    }

    pub fn eval_deriv(&self, s: Complex64) -> Complex64 {
        ((Complex64::new(4.0 * self.c4, 0.0) * s + 3.0 * self.c3) * s + 2.0 * self.c2) * s
            + self.c1
    }

    /// `max(1, |c3|, |c2|, |c1|, |c0|)`; reference scale for root residuals.
    pub fn coeff_scale(&self) -> f64 {
        [self.c4.abs(), self.c3.abs(), self.c2.abs(), self.c1.abs(), self.c0.abs()]
            .into_iter()
            .fold(1.0, f64::max)
    }
}

/// Quartet of decay exponents: two pairs `(s1, s1_bar)` and `(s2, s2_bar)`.
///
/// A complex pair is a conjugate pair with the `Im > 0` member unbarred; a
/// real pair holds the larger root unbarred. Pairs are ordered by `(Im, Re)`
/// of the unbarred member, descending, so the labeling is deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootQuartet {
    pub s1: Complex64,
    pub s1_bar: Complex64,
    pub s2: Complex64,
    pub s2_bar: Complex64,
}

impl RootQuartet {
    pub fn roots(&self) -> [Complex64; 4] {
        [self.s1, self.s1_bar, self.s2, self.s2_bar]
    }

    /// The same quartet with the two pairs exchanged. The dispersion
    /// determinant is symmetric under this relabeling.
    pub fn swapped(&self) -> Self {
        RootQuartet {
            s1: self.s2,
            s1_bar: self.s2_bar,
            s2: self.s1,
            s2_bar: self.s1_bar,
        }
    }
}

/// Coefficients in the reduced variables `(delta, epsilon, zeta)`.
pub fn coeffs_compact(delta: f64, epsilon: f64, zeta: f64) -> Result<QuarticCoeffs> {
    if !delta.is_finite() || delta + 1.0 <= 0.0 {
        return Err(Error::domain(format!("delta must be finite with delta + 1 > 0, got {delta}")));
    }
    if !epsilon.is_finite() {
        return Err(Error::domain(format!("epsilon must be finite, got {epsilon}")));
    }
    if !zeta.is_finite() || zeta < 0.0 {
        return Err(Error::domain(format!("zeta must be finite and >= 0, got {zeta}")));
    }
    Ok(QuarticCoeffs {
        c4: 1.0,
        c3: -2.0 * epsilon,
        c2: 4.0 * delta + 2.0 + epsilon * epsilon - (1.0 + delta) * zeta,
        c1: -2.0 * (1.0 + 2.0 * delta) * epsilon,
        c0: 1.0 + (1.0 + delta) * epsilon * epsilon - (1.0 + delta) * zeta,
    })
}

/// Coefficients straight from the moduli and the principal-axis angle `phi`,
/// normalized to a monic quartic. Equivalent to [`coeffs_compact`] when
/// `cot(phi)` equals the stretch and `alpha/gamma` is its fourth power.
pub fn coeffs_phi_form(
    alpha: f64,
    beta: f64,
    gamma: f64,
    phi: f64,
    rho_c2: f64,
) -> Result<QuarticCoeffs> {
    check_strong_ellipticity(alpha, beta, gamma)?;
    if !phi.is_finite() || phi <= 0.0 || phi >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::domain(format!("phi must lie in (0, pi/2), got {phi}")));
    }
    if !rho_c2.is_finite() || rho_c2 < 0.0 {
        return Err(Error::domain(format!("rho_c2 must be finite and >= 0, got {rho_c2}")));
    }
    let (sin, cos) = phi.sin_cos();
    let (s2, c2) = (sin * sin, cos * cos);
    let s2c2 = s2 * c2;
    let sin2 = (2.0 * phi).sin();
    let cos2 = (2.0 * phi).cos();
    let lead = alpha * s2 * s2 + 2.0 * beta * s2c2 + gamma * c2 * c2;
    if lead <= 0.0 {
        return Err(Error::Numerical(format!("degenerate leading coefficient {lead}")));
    }
    Ok(QuarticCoeffs {
        c4: 1.0,
        c3: -2.0 * sin2 * (alpha * s2 + beta * cos2 - gamma * c2) / lead,
        c2: (2.0 * beta + 6.0 * (alpha + gamma - 2.0 * beta) * s2c2 - rho_c2) / lead,
        c1: -2.0 * sin2 * (alpha * c2 - beta * cos2 - gamma * s2) / lead,
        c0: (alpha * c2 * c2 + 2.0 * beta * s2c2 + gamma * s2 * s2 - rho_c2) / lead,
    })
}

fn sqrt_real_aware(y: Complex64) -> Complex64 {
    if y.im == 0.0 {
        if y.re >= 0.0 {
            Complex64::new(y.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-y.re).sqrt())
        }
    } else {
        y.sqrt()
    }
}

/// `s^4 + c2 s^2 + c0`: quadratic in `s^2`, solved in closed form so the
/// zero-shear double pairs come out exact.
fn biquadratic_roots(c2: f64, c0: f64) -> [Complex64; 4] {
    let disc = c2 * c2 - 4.0 * c0;
    let (y1, y2) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (c2 + c2.signum() * sq);
        if q != 0.0 {
            (Complex64::new(q, 0.0), Complex64::new(c0 / q, 0.0))
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        }
    } else {
        let half = 0.5 * (-disc).sqrt();
        (
            Complex64::new(-0.5 * c2, half),
            Complex64::new(-0.5 * c2, -half),
        )
    };
    let r1 = sqrt_real_aware(y1);
    let r2 = sqrt_real_aware(y2);
    [r1, -r1, r2, -r2]
}

fn companion_roots(c: &QuarticCoeffs) -> [Complex64; 4] {
    let m = Matrix4::new(
        -c.c3, -c.c2, -c.c1, -c.c0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0,
    );
    let eig = m.complex_eigenvalues();
    [eig[0], eig[1], eig[2], eig[3]]
}

fn polish(c: &QuarticCoeffs, mut s: Complex64) -> Complex64 {
    let converged = f64::EPSILON * c.coeff_scale();
    for _ in 0..4 {
        let p = c.eval(s);
        if p.norm() <= converged {
            break;
        }
        let dp = c.eval_deriv(s);
        if dp.norm() < 1e-280 {
            break;
        }
        let step = p / dp;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        let cand = s - step;
        if c.eval(cand).norm() <= p.norm() {
            s = cand;
        } else {
            break;
        }
    }
    s
}

/// Solves the monic quartic and labels the roots. Eigenvalues of the
/// companion matrix seed the roots, then a few damped Newton corrections
/// sharpen them; the unsheared biquadratic case is dispatched in closed form.
pub fn solve_quartic(c: &QuarticCoeffs) -> Result<RootQuartet> {
    for (name, v) in [("c4", c.c4), ("c3", c.c3), ("c2", c.c2), ("c1", c.c1), ("c0", c.c0)] {
        if !v.is_finite() {
            return Err(Error::domain(format!("coefficient {name} must be finite, got {v}")));
        }
    }
    if c.c4 != 1.0 {
        return Err(Error::domain(format!("quartic must be monic, got c4 = {}", c.c4)));
    }
    let raw = if c.c3 == 0.0 && c.c1 == 0.0 {
        biquadratic_roots(c.c2, c.c0)
    } else {
        companion_roots(c)
    };
    let refined = raw.map(|s| polish(c, s));
    let quartet = pair_roots(refined)?;
    let residuals = quartet.roots().map(|s| c.eval(s).norm());
    let worst = residuals.into_iter().fold(0.0, f64::max);
    if worst > 1e-9 * c.coeff_scale() {
        return Err(Error::NonConvergence {
            roots: quartet.roots(),
            residuals,
            worst,
        });
    }
    Ok(quartet)
}

/// Labels four roots of a real quartic as two barred/unbarred pairs.
///
/// Complex roots must arrive conjugate-closed within `1e-9` of the root
/// scale; each `Im > 0` root is paired with its conjugate (the pair is
/// symmetrized, which leaves the polynomial residual unchanged). Real roots
/// pair up by closeness to each other's negation, larger member unbarred.
pub fn pair_roots(roots: [Complex64; 4]) -> Result<RootQuartet> {
    for z in roots {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::domain(format!("root {z} is not finite")));
        }
    }
    let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;

    // fixed-capacity buffers; this runs once per determinant evaluation,
    // so it stays allocation-free
    let mut reals = [0.0_f64; 4];
    let mut n_reals = 0;
    let mut cplx = [Complex64::new(0.0, 0.0); 4];
    let mut n_cplx = 0;
    for z in roots {
        if z.im.abs() <= tol {
            reals[n_reals] = z.re;
            n_reals += 1;
        } else {
            cplx[n_cplx] = z;
            n_cplx += 1;
        }
    }
    if n_cplx % 2 != 0 {
        return Err(Error::Pairing(format!(
            "odd number of complex roots ({n_cplx} of 4) within tolerance {tol:.2e}"
        )));
    }

    let mut pairs = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 2];
    let mut n_pairs = 0;
    let cplx = &mut cplx[..n_cplx];
    cplx.sort_unstable_by(|a, b| {
        b.im.partial_cmp(&a.im).unwrap().then(a.re.partial_cmp(&b.re).unwrap())
    });
    let mut taken = [false; 4];
    for i in 0..n_cplx {
        if taken[i] {
            continue;
        }
        let z = cplx[i];
        if z.im <= 0.0 {
            return Err(Error::Pairing(format!(
                "root {z} has no conjugate partner within tolerance {tol:.2e}"
            )));
        }
        let want = z.conj();
        let mut best: Option<(usize, f64)> = None;
        for (j, w) in cplx.iter().enumerate().skip(i + 1) {
            if taken[j] {
                continue;
            }
            let dist = (want - w).norm();
            if best.map_or(true, |(_, d)| dist < d) {
                best = Some((j, dist));
            }
        }
        let Some((j, dist)) = best else {
            return Err(Error::Pairing(format!("root {z} left unpaired")));
        };
        if dist > tol {
            return Err(Error::Pairing(format!(
                "root {z} has no conjugate partner within tolerance {tol:.2e} (closest miss {dist:.2e})"
            )));
        }
        taken[i] = true;
        taken[j] = true;
        let s = 0.5 * (z + cplx[j].conj());
        pairs[n_pairs] = (s, s.conj());
        n_pairs += 1;
    }

    let reals = &mut reals[..n_reals];
    reals.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut taken = [false; 4];
    for i in 0..n_reals {
        if taken[i] {
            continue;
        }
        let r = reals[i];
        let mut best: Option<(usize, f64)> = None;
        for (j, w) in reals.iter().enumerate().skip(i + 1) {
            if taken[j] {
                continue;
            }
            let dist = (-r - w).abs();
            if best.map_or(true, |(_, d)| dist < d) {
                best = Some((j, dist));
            }
        }
        let Some((j, _)) = best else {
            return Err(Error::Pairing("odd number of real roots".to_string()));
        };
        taken[i] = true;
        taken[j] = true;
        pairs[n_pairs] = (Complex64::new(r, 0.0), Complex64::new(reals[j], 0.0));
        n_pairs += 1;
    }

    debug_assert_eq!(n_pairs, 2);
    pairs.sort_unstable_by(|(a, _), (b, _)| {
        b.im.partial_cmp(&a.im).unwrap().then(b.re.partial_cmp(&a.re).unwrap())
    });
    let [(s1, s1_bar), (s2, s2_bar)] = pairs;
    Ok(RootQuartet { s1, s1_bar, s2, s2_bar })
}
