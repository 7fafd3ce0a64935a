//! The exact dispersion side: traction-free boundary functions, the
//! normalized dispersion determinant, and one-dimensional mode search over
//! speed at fixed wavenumber-thickness.

use crate::asymptotic::ModeSpeed;
use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::parallel::map_ordered;
use crate::quartic::{coeffs_compact, solve_quartic, RootQuartet};
use num_complex::Complex64;

/// Dimensionless wavenumber-thickness product `k*h` of the layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerGeometry {
    pub kh: f64,
}

impl LayerGeometry {
    pub fn new(kh: f64) -> Result<Self> {
        if !kh.is_finite() || kh <= 0.0 {
            return Err(Error::domain(format!("kh must be finite and > 0, got {kh}")));
        }
        Ok(LayerGeometry { kh })
    }
}

/// One evaluation of the dispersion determinant at squared speed `zeta`.
///
/// `residual` is the real part of the normalized determinant; its sign
/// changes bracket dispersion roots. `imag_leak` is the magnitude of the
/// imaginary part, which stays at rounding level while all four decay
/// exponents are non-real and becomes genuinely nonzero once a pair turns
/// real. `perturbed` marks evaluations that were nudged off a repeated-root
/// parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub zeta: f64,
    pub residual: f64,
    pub imag_leak: f64,
    pub perturbed: bool,
}

/// First traction-free boundary function. Callers must keep `delta + 1 > 0`
/// and `lambda > 0`; no validation happens here.
pub fn f_val(s: Complex64, delta: f64, lambda: f64, p_bar: f64, zeta: f64) -> Complex64 {
    let li = 1.0 / lambda;
    (s - lambda) * (s + li) * (s + li) / (1.0 + delta)
        + 3.0 * s
        - lambda
        + 2.0 * li
        + p_bar * (s - lambda)
        - zeta * s
}

/// Second traction-free boundary function; same contract as [`f_val`].
pub fn g_val(s: Complex64, delta: f64, lambda: f64, p_bar: f64, zeta: f64) -> Complex64 {
    let li = 1.0 / lambda;
    (s - lambda) * (s - lambda) * (s + li) / (1.0 + delta)
        + 3.0 * s
        - 2.0 * lambda
        + li
        + p_bar * (s + li)
        - zeta * s
}

/// Evaluates the dispersion determinant for a given exponent quartet,
/// without any repeated-root handling. Public so the determinant's symmetry
/// under relabeling the two pairs can be exercised directly.
///
/// The assembly normalizes all exponentials by the largest magnitude among
/// them, then divides by the larger of the two boundary-function products,
/// so the returned residual is scale-free and overflow-proof; its zeros in
/// `zeta` are unchanged.
pub fn determinant_from_roots(
    quartet: &RootQuartet,
    zeta: f64,
    geometry: &LayerGeometry,
    params: &MaterialParams,
) -> Result<DispersionSample> {
    let (delta, lambda, p_bar) = (params.delta, params.shear.lambda, params.p_bar);
    let kh = geometry.kh;

    let f1 = f_val(quartet.s1, delta, lambda, p_bar, zeta);
    let g1 = g_val(quartet.s1, delta, lambda, p_bar, zeta);
    let f1b = f_val(quartet.s1_bar, delta, lambda, p_bar, zeta);
    let g1b = g_val(quartet.s1_bar, delta, lambda, p_bar, zeta);
    let f2 = f_val(quartet.s2, delta, lambda, p_bar, zeta);
    let g2 = g_val(quartet.s2, delta, lambda, p_bar, zeta);
    let f2b = f_val(quartet.s2_bar, delta, lambda, p_bar, zeta);
    let g2b = g_val(quartet.s2_bar, delta, lambda, p_bar, zeta);

    let fg1 = f1 * g1b - f1b * g1;
    let fg2 = f2 * g2b - f2b * g2;
    let t1 = f1 * g2b - f2b * g1;
    let t2 = f1b * g2 - f2 * g1b;

    let u1 = Complex64::new(0.0, -kh) * quartet.s1;
    let u1b = Complex64::new(0.0, kh) * quartet.s1_bar;
    let u2 = Complex64::new(0.0, -kh) * quartet.s2;
    let u2b = Complex64::new(0.0, kh) * quartet.s2_bar;

    let w11 = u1b + u2;
    let w12 = u1 + u2b;
    let we = u1 + u1b + u2 + u2b;
    let w21 = u1 + u1b;
    let w22 = u2 + u2b;

    let m = [0.0, w11.re, w12.re, we.re, w21.re, w22.re]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let e = |w: Complex64| (w - m).exp();
    let zero = Complex64::new(0.0, 0.0);
    let b1 = e(w11) + e(w12) - e(zero) - e(we);
    let b2 = e(w21) + e(w22) - e(zero) - e(we);

    let p1 = fg1 * fg2;
    let p2 = t1 * t2;
    let nf = p1.norm().max(p2.norm()).max(f64::MIN_POSITIVE);
    let d = (p1 * b1 + p2 * b2) / nf;

    if !d.re.is_finite() || !d.im.is_finite() {
        return Err(Error::Numerical(format!(
            "determinant not finite at zeta = {zeta}, kh = {kh}"
        )));
    }
    Ok(DispersionSample {
        zeta,
        residual: d.re,
        imag_leak: d.im.abs(),
        perturbed: false,
    })
}

fn is_degenerate(quartet: &RootQuartet) -> bool {
    let roots = quartet.roots();
    let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut min_dist = f64::INFINITY;
    for i in 0..4 {
        for j in (i + 1)..4 {
            min_dist = min_dist.min((roots[i] - roots[j]).norm());
        }
    }
    min_dist <= 1e-8 * scale
}

/// Solves the propagation quartic at `zeta` and evaluates the dispersion
/// determinant. At isolated parameter points where the quartic has a
/// repeated root the partial waves coincide and the determinant degenerates;
/// such points are evaluated at a slightly perturbed `zeta` (1e-7 relative,
/// growing if needed) and flagged `perturbed`.
pub fn determinant(
    zeta: f64,
    geometry: &LayerGeometry,
    params: &MaterialParams,
) -> Result<DispersionSample> {
    if !zeta.is_finite() || zeta < 0.0 {
        return Err(Error::domain(format!("zeta must be finite and >= 0, got {zeta}")));
    }
    if params.delta + 1.0 <= 0.0 || params.shear.lambda <= 0.0 {
        return Err(Error::Admissibility(format!(
            "params inadmissible: delta = {}, lambda = {}",
            params.delta, params.shear.lambda
        )));
    }
    let quartet = solve_quartic(&coeffs_compact(params.delta, params.shear.epsilon, zeta)?)?;
    if !is_degenerate(&quartet) {
        return determinant_from_roots(&quartet, zeta, geometry, params);
    }
    for factor in [1e-7, 1e-6, 1e-5] {
        let nudged = if zeta.abs() > 1e-12 { zeta * (1.0 + factor) } else { factor };
        let quartet = solve_quartic(&coeffs_compact(params.delta, params.shear.epsilon, nudged)?)?;
        if !is_degenerate(&quartet) {
            let mut sample = determinant_from_roots(&quartet, nudged, geometry, params)?;
            sample.zeta = zeta;
            sample.perturbed = true;
            return Ok(sample);
        }
    }
    Err(Error::Numerical(format!(
        "repeated decay exponents persist near zeta = {zeta}"
    )))
}

/// Result of a speed-interval scan: `modes` are refined sign-change roots of
/// the residual, `candidates` are grid-local minima of `|residual|` below
/// 1e-6 without a sign change (possible even-multiplicity roots; bisection
/// cannot confirm them).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeScan {
    pub modes: Vec<ModeSpeed>,
    pub candidates: Vec<ModeSpeed>,
}

const TANGENTIAL_ABS: f64 = 1e-6;
const DEDUP_ABS: f64 = 1e-9;
const SCAN_CHUNK: usize = 1 << 16;

/// Scans `[v_min, v_max]` on a uniform `grid_points` grid (`zeta = v^2`),
/// brackets residual sign changes, and refines each to `|dv| <= 1e-10`.
/// Grid evaluation may run in parallel; output is deterministic and sorted
/// by `v` regardless.
pub fn find_modes_exact(
    geometry: &LayerGeometry,
    params: &MaterialParams,
    v_min: f64,
    v_max: f64,
    grid_points: usize,
) -> Result<ModeScan> {
    find_modes_with_tol(geometry, params, v_min, v_max, grid_points, 1e-10)
}

/// [`find_modes_exact`] with an explicit refinement tolerance on `v`.
pub fn find_modes_with_tol(
    geometry: &LayerGeometry,
    params: &MaterialParams,
    v_min: f64,
    v_max: f64,
    grid_points: usize,
    refine_tol: f64,
) -> Result<ModeScan> {
    if !v_min.is_finite() || !v_max.is_finite() || v_min < 0.0 || v_min >= v_max {
        return Err(Error::domain(format!(
            "speed window must satisfy 0 <= v_min < v_max, got [{v_min}, {v_max}]"
        )));
    }
    if grid_points < 2 {
        return Err(Error::domain("grid_points must be >= 2"));
    }
    if !refine_tol.is_finite() || refine_tol <= 0.0 {
        return Err(Error::domain(format!("refine_tol must be > 0, got {refine_tol}")));
    }

    let residual_at = |v: f64| determinant(v * v, geometry, params).map(|s| s.residual);
    let step = (v_max - v_min) / (grid_points - 1) as f64;

    let mut brackets: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut roots: Vec<f64> = Vec::new();
    let mut candidates: Vec<f64> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut prev2: Option<(f64, f64)> = None;

    let mut idx = 0usize;
    while idx < grid_points {
        let count = SCAN_CHUNK.min(grid_points - idx);
        let vs: Vec<f64> = (idx..idx + count).map(|i| v_min + step * i as f64).collect();
        let samples = map_ordered(&vs, |&v| residual_at(v));
        for (j, sample) in samples.into_iter().enumerate() {
            let res = sample?;
            let v = vs[j];
            if let Some((pv, pres)) = prev {
                if pres != 0.0 && res != 0.0 && pres.signum() != res.signum() {
                    brackets.push((pv, v, pres, res));
                }
            }
            if res == 0.0 {
                roots.push(v);
            }
            if let (Some((_, r2)), Some((v1, r1))) = (prev2, prev) {
                let no_sign_change =
                    r1 != 0.0 && r2 != 0.0 && res != 0.0 && r1.signum() == r2.signum() && r1.signum() == res.signum();
                if no_sign_change
                    && r1.abs() <= r2.abs()
                    && r1.abs() <= res.abs()
                    && r1.abs() < TANGENTIAL_ABS
                {
                    candidates.push(v1);
                }
            }
            prev2 = prev;
            prev = Some((v, res));
        }
        idx += count;
    }

    for (a, b, fa, fb) in brackets {
        roots.push(refine_bracket(&residual_at, a, b, fa, fb, refine_tol)?);
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup_by(|x, y| (*x - *y).abs() <= DEDUP_ABS);

    Ok(ModeScan {
        modes: roots.into_iter().map(ModeSpeed::exact).collect(),
        candidates: candidates.into_iter().map(ModeSpeed::exact).collect(),
    })
}

/// Secant steps inside a shrinking bracket, with a bisection fallback every
/// fourth iteration and whenever the secant estimate leaves the bracket.
/// Terminates once the bracket is narrower than `tol` and the best residual
/// has dropped below 1e-8 of the initial bracket scale (floored at 1e-13,
/// the evaluation noise level of the normalized residual).
fn refine_bracket<F>(f: &F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let res_goal = (1e-8 * fa.abs().max(fb.abs())).max(1e-13);
    let mut best = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    for iter in 0..160 {
        if best.1 == 0.0 || ((b - a) <= tol && best.1.abs() <= res_goal) {
            return Ok(best.0);
        }
        let mut x = if iter % 4 != 3 && fb != fa {
            b - fb * (b - a) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        if !x.is_finite() || x <= a || x >= b {
            x = 0.5 * (a + b);
        }
        if x <= a || x >= b {
            return Ok(best.0);
        }
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Err(Error::Numerical(format!(
        "root refinement stalled in bracket [{a}, {b}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{case_a_params, case_b_params, MaterialParams};
    use std::f64::consts::PI;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn case_a_unsheared() -> MaterialParams {
        case_a_params(1.0).unwrap()
    }

    #[test]
    fn boundary_function_zeros() {
        // f vanishes at s = lambda when zeta*lambda = 2*lambda + 2/lambda
        let f = f_val(c64(1.0, 0.0), 0.3, 1.0, 0.7, 4.0);
        assert!(f.norm() <= 1e-14);
        // and at s = 0 for the unsheared rest state
        let f = f_val(c64(0.0, 0.0), 0.0, 1.0, 0.0, 0.0);
        assert!(f.norm() <= 1e-14);
        // g vanishes at s = -1/lambda when zeta/lambda = 2*lambda + 2/lambda
        let g = g_val(c64(-1.0, 0.0), 0.3, 1.0, 0.7, 4.0);
        assert!(g.norm() <= 1e-14);
        let g = g_val(c64(0.0, 0.0), 0.0, 1.0, 0.0, 0.0);
        assert!(g.norm() <= 1e-14);
    }

    #[test]
    fn boundary_function_reference_values() {
        let f = f_val(c64(0.0, 1.0), 0.0, 1.0, 0.0, 0.5);
        assert!((f - c64(-1.0, 0.5)).norm() <= 1e-14, "f(i) = {f}");
        let g = g_val(c64(0.0, 1.0), 0.0, 1.0, 0.0, 0.5);
        assert!((g - c64(1.0, 0.5)).norm() <= 1e-14, "g(i) = {g}");
    }

    #[test]
    fn at_general_s_lambda_terms() {
        let (lambda, zeta) = (1.7, 2.3);
        let f = f_val(c64(lambda, 0.0), 0.4, lambda, 0.9, zeta);
        let expect = 2.0 * lambda + 2.0 / lambda - zeta * lambda;
        assert!((f - c64(expect, 0.0)).norm() <= 1e-12);
        let g = g_val(c64(-1.0 / lambda, 0.0), 0.4, lambda, 0.9, zeta);
        let expect = -2.0 / lambda - 2.0 * lambda + zeta / lambda;
        assert!((g - c64(expect, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn residual_reference_conjugate_regime() {
        let geom = LayerGeometry::new(1.0).unwrap();
        let s = determinant(0.25, &geom, &case_a_unsheared()).unwrap();
        assert!((s.residual - -0.029473456986525592).abs() <= 1e-12, "res {}", s.residual);
        assert_eq!(s.imag_leak, 0.0);
        assert!(!s.perturbed);
    }

    #[test]
    fn residual_reference_mixed_regime() {
        let geom = LayerGeometry::new(2.0).unwrap();
        let s = determinant(4.0, &geom, &case_a_unsheared()).unwrap();
        assert!((s.residual - -0.10776738382123856).abs() <= 1e-12, "res {}", s.residual);
        assert!((s.imag_leak - 0.3224866911145631).abs() <= 1e-9, "leak {}", s.imag_leak);
    }

    #[test]
    fn vanishing_thickness_limit() {
        let geom = LayerGeometry::new(1e-8).unwrap();
        let s = determinant(0.25, &geom, &case_a_unsheared()).unwrap();
        assert!(s.residual.abs() <= 1e-12, "res {}", s.residual);
    }

    #[test]
    fn large_arguments_stay_finite() {
        let geom = LayerGeometry::new(10.0).unwrap();
        let s = determinant(3600.0, &geom, &case_a_unsheared()).unwrap();
        assert!((s.residual - 0.03235718407112753).abs() <= 1e-9, "res {}", s.residual);
        assert!(s.imag_leak.is_finite());
    }

    #[test]
    fn repeated_exponents_get_nudged() {
        let geom = LayerGeometry::new(1.0).unwrap();
        let s = determinant(0.0, &geom, &case_a_unsheared()).unwrap();
        assert!(s.perturbed);
        assert_eq!(s.zeta, 0.0);
        assert!(s.residual.is_finite());
    }

    #[test]
    fn input_validation() {
        assert!(LayerGeometry::new(0.0).is_err());
        assert!(LayerGeometry::new(f64::NAN).is_err());
        let geom = LayerGeometry::new(1.0).unwrap();
        assert!(determinant(-1.0, &geom, &case_a_unsheared()).is_err());
        assert!(find_modes_exact(&geom, &case_a_unsheared(), 1.0, 1.0, 100).is_err());
        assert!(find_modes_exact(&geom, &case_a_unsheared(), 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn pair_swap_leaves_residual_unchanged() {
        use crate::quartic::coeffs_compact;
        let geom = LayerGeometry::new(1.3).unwrap();
        let params = case_b_params(1.8).unwrap();
        for k in 0..50 {
            let zeta = 0.1 + 0.37 * k as f64;
            let q = solve_quartic(
                &coeffs_compact(params.delta, params.shear.epsilon, zeta).unwrap(),
            )
            .unwrap();
            let d0 = determinant_from_roots(&q, zeta, &geom, &params).unwrap();
            let d1 = determinant_from_roots(&q.swapped(), zeta, &geom, &params).unwrap();
            let scale = d0.residual.abs().max(1.0);
            assert!(
                (d0.residual - d1.residual).abs() <= 1e-10 * scale,
                "zeta={zeta}: {} vs {}",
                d0.residual,
                d1.residual
            );
        }
    }

    #[test]
    fn conjugate_regime_keeps_residual_real() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut accepted = 0;
        while accepted < 200 {
            let lambda = rng.gen_range(1.0..2.5);
            let params = if rng.gen_bool(0.5) {
                case_a_params(lambda).unwrap()
            } else {
                case_b_params(lambda).unwrap()
            };
            let zeta = rng.gen_range(0.0..0.9);
            let q = match solve_quartic(
                &coeffs_compact(params.delta, params.shear.epsilon, zeta).unwrap(),
            ) {
                Ok(q) => q,
                Err(_) => continue,
            };
            let scale = 1.0 + q.roots().iter().map(|z| z.norm()).fold(0.0, f64::max);
            if q.roots().iter().any(|z| z.im.abs() <= 1e-6 * scale) {
                continue;
            }
            let geom = LayerGeometry::new(rng.gen_range(0.2..4.0)).unwrap();
            let s = determinant_from_roots(&q, zeta, &geom, &params).unwrap();
            assert!(
                s.imag_leak <= 1e-8 * s.residual.abs().max(1.0),
                "leak {} at zeta {zeta}",
                s.imag_leak
            );
            accepted += 1;
        }
    }

    #[test]
    fn residual_invariant_under_common_moduli_scale() {
        let geom = LayerGeometry::new(1.7).unwrap();
        let base = MaterialParams::from_moduli(4.0, 1.0, 0.25)
            .unwrap()
            .with_p_bar(0.3)
            .unwrap();
        let scaled = MaterialParams::from_moduli(4.0 * 77.0, 77.0, 0.25 * 77.0)
            .unwrap()
            .with_p_bar(0.3)
            .unwrap();
        for k in 0..40 {
            let zeta = 0.05 + 0.3 * k as f64;
            let a = determinant(zeta, &geom, &base).unwrap();
            let b = determinant(zeta, &geom, &scaled).unwrap();
            assert!(
                (a.residual - b.residual).abs() <= 1e-13 * a.residual.abs().max(1.0),
                "zeta={zeta}: {} vs {}",
                a.residual,
                b.residual
            );
        }
    }

    #[test]
    fn fundamental_mode_location() {
        let geom = LayerGeometry::new(1.0).unwrap();
        let scan = find_modes_exact(&geom, &case_a_unsheared(), 1.2, 1.6, 4001).unwrap();
        assert_eq!(scan.modes.len(), 1);
        let v = scan.modes[0].v;
        assert!((v - 1.3867411257609015).abs() <= 1e-8, "v = {v}");
        assert_eq!(scan.modes[0].provenance, crate::asymptotic::Provenance::Exact);
    }

    #[test]
    fn window_below_first_mode_is_empty() {
        let geom = LayerGeometry::new(1.0).unwrap();
        let scan = find_modes_exact(&geom, &case_a_unsheared(), 0.05, 0.9, 2000).unwrap();
        assert!(scan.modes.is_empty(), "{:?}", scan.modes);
    }

    #[test]
    fn doublet_near_five_pi() {
        let geom = LayerGeometry::new(1.0).unwrap();
        let scan =
            find_modes_exact(&geom, &case_a_unsheared(), 4.5 * PI, 5.5 * PI, 10001).unwrap();
        let vs: Vec<f64> = scan.modes.iter().map(|m| m.v).collect();
        assert_eq!(vs.len(), 2, "{vs:?}");
        assert!((vs[0] - 15.739762070223112).abs() <= 1e-8, "{vs:?}");
        assert!((vs[1] - 15.74087622982102).abs() <= 1e-8, "{vs:?}");
        for v in &vs {
            assert!((v - 5.0 * PI).abs() / (5.0 * PI) < 0.05);
        }
    }

    #[test]
    fn refined_roots_beat_bracket_residuals() {
        let geom = LayerGeometry::new(1.0).unwrap();
        let params = case_a_unsheared();
        let scan = find_modes_exact(&geom, &params, 4.5 * PI, 5.5 * PI, 10001).unwrap();
        let step = PI / 10000.0;
        for m in &scan.modes {
            let at = determinant(m.v * m.v, &geom, &params).unwrap().residual.abs();
            let lo = determinant((m.v - step).powi(2), &geom, &params).unwrap().residual.abs();
            let hi = determinant((m.v + step).powi(2), &geom, &params).unwrap().residual.abs();
            assert!(at <= 1e-8 * lo.max(hi), "at={at:e} lo={lo:e} hi={hi:e}");
        }
    }

    #[test]
    fn grid_doubling_keeps_roots() {
        let geom = LayerGeometry::new(1.0).unwrap();
        let params = case_a_unsheared();
        let a = find_modes_exact(&geom, &params, 1.2, 1.6, 2001).unwrap();
        let b = find_modes_exact(&geom, &params, 1.2, 1.6, 4002).unwrap();
        assert_eq!(a.modes.len(), b.modes.len());
        for (x, y) in a.modes.iter().zip(&b.modes) {
            assert!((x.v - y.v).abs() <= 1e-9);
        }
    }
}
