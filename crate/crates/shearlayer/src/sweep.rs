//! Parameter sweeps over wavenumber-thickness, exact-vs-asymptotic
//! comparison reports, and CSV/JSON emission. All output is deterministic:
//! rows are fully ordered and numbers print in shortest round-trip form.

use crate::asymptotic::{case_a_speed, case_b_speed, v_family, Family, ModeSpeed};
use crate::dispersion::{find_modes_exact, LayerGeometry, ModeScan};
use crate::error::{Error, Result};
use crate::material::{case_a_params, case_b_params, shear_from_stretch, MaterialParams, ShearState};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Which material class a sweep runs over: the two closed-form classes, or
/// raw moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    A,
    B,
    #[serde(rename = "raw")]
    Raw,
}

impl CaseKind {
    fn label(self) -> &'static str {
        match self {
            CaseKind::A => "A",
            CaseKind::B => "B",
            CaseKind::Raw => "raw",
        }
    }
}

/// A scalar or a list of scalars; configs may write `"epsilon": 5` or
/// `"epsilon": [1, 5, 9, 19]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueList {
    One(f64),
    Many(Vec<f64>),
}

impl ValueList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ValueList::One(x) => vec![*x],
            ValueList::Many(xs) => xs.clone(),
        }
    }
}

/// Family selector: `1`, `2`, or `"both"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyChoice {
    One,
    Two,
    Both,
}

impl FamilyChoice {
    pub fn families(self) -> Vec<Family> {
        match self {
            FamilyChoice::One => vec![Family::One],
            FamilyChoice::Two => vec![Family::Two],
            FamilyChoice::Both => vec![Family::One, Family::Two],
        }
    }
}

impl Serialize for FamilyChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FamilyChoice::One => s.serialize_u8(1),
            FamilyChoice::Two => s.serialize_u8(2),
            FamilyChoice::Both => s.serialize_str("both"),
        }
    }
}

impl<'de> Deserialize<'de> for FamilyChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = FamilyChoice;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "1, 2, or \"both\"")
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> std::result::Result<FamilyChoice, E> {
                match x {
                    1 => Ok(FamilyChoice::One),
                    2 => Ok(FamilyChoice::Two),
                    other => Err(E::custom(format!("family must be 1, 2, or \"both\", got {other}"))),
                }
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> std::result::Result<FamilyChoice, E> {
                u64::try_from(x)
                    .map_err(|_| E::custom("family must be 1, 2, or \"both\""))
                    .and_then(|x| self.visit_u64(x))
            }
            fn visit_str<E: de::Error>(self, x: &str) -> std::result::Result<FamilyChoice, E> {
                match x {
                    "1" => Ok(FamilyChoice::One),
                    "2" => Ok(FamilyChoice::Two),
                    "both" => Ok(FamilyChoice::Both),
                    other => Err(E::custom(format!("family must be 1, 2, or \"both\", got \"{other}\""))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

fn default_kh_min() -> f64 {
    0.5
}
fn default_kh_max() -> f64 {
    10.0
}
fn default_kh_steps() -> usize {
    200
}
fn default_family() -> FamilyChoice {
    FamilyChoice::Both
}

/// Run configuration for a dispersion sweep. Mirrors the JSON config format
/// field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub case: CaseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<ValueList>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<ValueList>,
    #[serde(default)]
    pub p_bar: f64,
    #[serde(default = "default_kh_min")]
    pub kh_min: f64,
    #[serde(default = "default_kh_max")]
    pub kh_max: f64,
    #[serde(default = "default_kh_steps")]
    pub kh_steps: usize,
    pub modes: Vec<u32>,
    #[serde(default = "default_family")]
    pub family: FamilyChoice,
    #[serde(default)]
    pub compute_exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

/// One output record: a single `(case, epsilon, family, n, kh)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub case: CaseKind,
    pub family: u8,
    pub n: u32,
    pub epsilon: f64,
    pub p_bar: f64,
    pub kh: f64,
    pub v_asym: f64,
    pub v_exact: Option<f64>,
    pub rel_err: Option<f64>,
    pub flags: String,
}

const FLAG_LOW_CONFIDENCE: &str = "low-confidence";
const FLAG_TANGENTIAL: &str = "tangential-candidate";

/// Exact roots cluster in close pairs near high-order predictions, with
/// separations shrinking like (kh v)^-3. A scan step a few times smaller
/// than that keeps both members of a pair visible as sign changes.
fn doublet_step(kh: f64, v: f64, spacing: f64) -> f64 {
    (0.2 / (kh * v).powi(3)).clamp(5e-7 * spacing, 4e-4 * spacing)
}

fn join_flags(low_confidence: bool, tangential: bool) -> String {
    let mut parts = Vec::new();
    if low_confidence {
        parts.push(FLAG_LOW_CONFIDENCE);
    }
    if tangential {
        parts.push(FLAG_TANGENTIAL);
    }
    parts.join(";")
}

fn check_positive(field: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::config(field, format!("must be finite and > 0, got {x}")));
    }
    Ok(())
}

fn validate_spec(spec: &SweepSpec) -> Result<()> {
    check_positive("kh_min", spec.kh_min)?;
    if !spec.kh_max.is_finite() || spec.kh_max < spec.kh_min {
        return Err(Error::config(
            "kh_max",
            format!("must be finite and >= kh_min, got {}", spec.kh_max),
        ));
    }
    if spec.kh_steps < 1 {
        return Err(Error::config("kh_steps", "must be >= 1"));
    }
    if spec.modes.is_empty() {
        return Err(Error::config("modes", "must be non-empty"));
    }
    if spec.modes.iter().any(|&n| n < 1) {
        return Err(Error::config("modes", "every mode index must be >= 1"));
    }
    if !spec.p_bar.is_finite() {
        return Err(Error::config("p_bar", "must be finite"));
    }
    if let Some(v) = spec.v_max {
        check_positive("v_max", v)?;
    }
    if spec.epsilon.is_some() && spec.lambda.is_some() {
        return Err(Error::config("epsilon", "give either epsilon or lambda, not both"));
    }
    match spec.case {
        CaseKind::A | CaseKind::B => {
            for field in ["alpha", "beta", "gamma"] {
                let given = match field {
                    "alpha" => spec.alpha.is_some(),
                    "beta" => spec.beta.is_some(),
                    _ => spec.gamma.is_some(),
                };
                if given {
                    return Err(Error::config(field, "only allowed with case \"raw\""));
                }
            }
        }
        CaseKind::Raw => {
            for (field, value) in [("alpha", spec.alpha), ("beta", spec.beta), ("gamma", spec.gamma)] {
                if value.is_none() {
                    return Err(Error::config(field, "required for case \"raw\""));
                }
            }
            if spec.epsilon.is_some() || spec.lambda.is_some() {
                return Err(Error::config(
                    "epsilon",
                    "not allowed for case \"raw\"; the stretch follows from the moduli",
                ));
            }
        }
    }
    Ok(())
}

/// The material states a spec sweeps over, one per shear amount, each paired
/// with its `a = 1 + delta`.
fn materialize(spec: &SweepSpec) -> Result<Vec<(f64, MaterialParams, f64)>> {
    let eps_list: Vec<f64> = if let Some(l) = &spec.lambda {
        let mut eps = Vec::new();
        for lam in l.values() {
            if !lam.is_finite() || lam <= 0.0 {
                return Err(Error::config("lambda", format!("stretch must be > 0, got {lam}")));
            }
            eps.push(shear_from_stretch(lam)?.epsilon);
        }
        eps
    } else if let Some(e) = &spec.epsilon {
        for x in e.values() {
            if !x.is_finite() {
                return Err(Error::config("epsilon", format!("must be finite, got {x}")));
            }
        }
        e.values()
    } else {
        match spec.case {
            CaseKind::A => vec![0.0],
            CaseKind::B => {
                return Err(Error::config("epsilon", "required for case \"B\""));
            }
            CaseKind::Raw => vec![],
        }
    };

    let mut out = Vec::new();
    match spec.case {
        CaseKind::Raw => {
            let (alpha, beta, gamma) = (
                spec.alpha.expect("validated"),
                spec.beta.expect("validated"),
                spec.gamma.expect("validated"),
            );
            let params = MaterialParams::from_moduli(alpha, beta, gamma)?.with_p_bar(spec.p_bar)?;
            let a = 1.0 + params.delta;
            out.push((params.shear.epsilon, params, a));
        }
        CaseKind::A | CaseKind::B => {
            let mut sorted = eps_list;
            sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            sorted.dedup();
            for eps in sorted {
                let lambda = ShearState::from_amount(eps)?.lambda;
                let params = match spec.case {
                    CaseKind::A => case_a_params(lambda)?,
                    _ => case_b_params(lambda)?,
                }
                .with_p_bar(spec.p_bar)?;
                let a = 1.0 + params.delta;
                out.push((eps, params, a));
            }
        }
    }
    Ok(out)
}

fn kh_grid(spec: &SweepSpec) -> Vec<f64> {
    if spec.kh_steps == 1 {
        return vec![spec.kh_min];
    }
    let step = (spec.kh_max - spec.kh_min) / (spec.kh_steps - 1) as f64;
    (0..spec.kh_steps).map(|i| spec.kh_min + step * i as f64).collect()
}

fn predict(case: CaseKind, n: u32, kh: f64, epsilon: f64, a: f64, family: Family) -> Result<ModeSpeed> {
    match case {
        CaseKind::A => case_a_speed(n, kh, family),
        CaseKind::B => case_b_speed(n, kh, epsilon, family),
        CaseKind::Raw => v_family(n, kh, a, family),
    }
}

/// Nearest exact root (or, failing that, tangential candidate) to `v_pred`
/// within the 25% matching gate. The central half mode spacing is scanned
/// densely enough to split close root pairs; the rest of the gate window,
/// where roots are isolated when they occur at all, gets a coarse scan.
/// Returns `(v, tangential)`.
fn exact_near(
    geometry: &LayerGeometry,
    params: &MaterialParams,
    v_pred: f64,
    a: f64,
    v_ceiling: Option<f64>,
) -> Result<Option<(f64, bool)>> {
    let gate = 0.25 * v_pred;
    let spacing1 = PI / (geometry.kh * a.sqrt());
    let lo = (v_pred - gate).max(1e-6);
    let mut hi = v_pred + gate;
    if let Some(ceiling) = v_ceiling {
        hi = hi.min(ceiling);
    }
    if hi <= lo {
        return Ok(None);
    }

    let core_lo = lo.max(v_pred - 0.25 * spacing1);
    let core_hi = hi.min(v_pred + 0.25 * spacing1);
    let fine = doublet_step(geometry.kh, v_pred.max(1.0), spacing1);
    let coarse = spacing1 / 40.0;

    let mut scans = Vec::new();
    for (seg_lo, seg_hi, step) in [
        (lo, core_lo, coarse),
        (core_lo, core_hi, fine),
        (core_hi, hi, coarse),
    ] {
        if seg_hi <= seg_lo {
            continue;
        }
        let points = (((seg_hi - seg_lo) / step).ceil() as usize + 2).max(8);
        scans.push(find_modes_exact(geometry, params, seg_lo, seg_hi, points)?);
    }

    let nearest = |pick: fn(&ModeScan) -> &[ModeSpeed]| {
        scans
            .iter()
            .flat_map(|s| pick(s).iter().map(|m| m.v))
            .filter(|v| (v - v_pred).abs() <= gate)
            .min_by(|x, y| {
                (x - v_pred)
                    .abs()
                    .partial_cmp(&(y - v_pred).abs())
                    .unwrap()
            })
    };
    Ok(nearest(|s| &s.modes)
        .map(|v| (v, false))
        .or_else(|| nearest(|s| &s.candidates).map(|v| (v, true))))
}

/// Runs a sweep: one row per `(epsilon, family, n, kh)` combination, fully
/// sorted. `v_exact` is filled when `compute_exact` finds a root within 25%
/// of the prediction.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    validate_spec(spec)?;
    let materials = materialize(spec)?;
    let khs = kh_grid(spec);
    let mut modes = spec.modes.clone();
    modes.sort_unstable();
    modes.dedup();

    let mut rows = Vec::new();
    for (epsilon, params, a) in &materials {
        for family in spec.family.families() {
            for &n in &modes {
                for &kh in &khs {
                    let pred = predict(spec.case, n, kh, *epsilon, *a, family)?;
                    let mut v_exact = None;
                    let mut rel_err = None;
                    let mut tangential = false;
                    if spec.compute_exact {
                        let geometry = LayerGeometry::new(kh)?;
                        if let Some((v, tang)) =
                            exact_near(&geometry, params, pred.v, *a, spec.v_max)?
                        {
                            rel_err = Some((v - pred.v).abs() / pred.v);
                            v_exact = Some(v);
                            tangential = tang;
                        }
                    }
                    rows.push(SweepRow {
                        case: spec.case,
                        family: family.index(),
                        n,
                        epsilon: *epsilon,
                        p_bar: spec.p_bar,
                        kh,
                        v_asym: pred.v,
                        v_exact,
                        rel_err,
                        flags: join_flags(pred.low_confidence, tangential),
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Output format for [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes rows as CSV (fixed column order, empty fields for absent
/// optionals) or as a JSON array of row objects with the same keys. Numbers
/// print in shortest round-trip decimal, so identical rows emit identical
/// bytes.
pub fn emit(rows: &[SweepRow], format: EmitFormat, dest: &mut dyn Write) -> Result<()> {
    match format {
        EmitFormat::Csv => {
            writeln!(dest, "case,family,n,epsilon,p_bar,kh,v_asym,v_exact,rel_err,flags")?;
            for r in rows {
                writeln!(
                    dest,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.case.label(),
                    r.family,
                    r.n,
                    r.epsilon,
                    r.p_bar,
                    r.kh,
                    r.v_asym,
                    fmt_opt(r.v_exact),
                    fmt_opt(r.rel_err),
                    r.flags
                )?;
            }
        }
        EmitFormat::Json => {
            serde_json::to_writer_pretty(&mut *dest, rows)
                .map_err(|e| Error::Io(e.to_string()))?;
            writeln!(dest)?;
        }
    }
    Ok(())
}

/// One line of a comparison report: a prediction and the exact root matched
/// to it, if any.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub family: u8,
    pub n: u32,
    pub v_asym: f64,
    pub v_exact: Option<f64>,
    pub rel_err: Option<f64>,
    pub low_confidence: bool,
}

/// Exact-vs-asymptotic comparison at fixed `kh`.
///
/// `rows` covers the requested families for `n = 1..=n_max`. `leftover_exact`
/// lists every found root that no row displays: roots with no prediction
/// within the 25% gate, doublet partners beaten by a closer root, and roots
/// matched to a family outside the requested choice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub kh: f64,
    pub rows: Vec<CompareRow>,
    pub leftover_exact: Vec<f64>,
}

/// Scans for exact roots up to half a spacing past the `n_max` family 1
/// prediction and matches each found root to the nearest prediction of
/// either family (ties prefer family 1). Scan windows cover every
/// prediction with a core fine enough to split the doublets that straddle
/// the high-order predictions.
pub fn compare_report(
    kh: f64,
    params: &MaterialParams,
    n_max: u32,
    family: FamilyChoice,
) -> Result<CompareReport> {
    if !kh.is_finite() || kh <= 0.0 {
        return Err(Error::config("kh", format!("must be finite and > 0, got {kh}")));
    }
    if n_max < 1 {
        return Err(Error::config("n_max", "must be >= 1"));
    }
    let geometry = LayerGeometry::new(kh)?;
    let a = 1.0 + params.delta;
    let s2 = PI / (2.0 * kh * a.sqrt());
    let v_hi = (n_max as f64 + 0.5) * PI / (kh * a.sqrt());

    // prediction pool over both families, regardless of the requested rows
    let mut pool: Vec<(Family, u32, f64)> = Vec::new();
    for n in 1..=n_max {
        pool.push((Family::One, n, v_family(n, kh, a, Family::One)?.v));
    }
    for n in 1..=(2 * n_max + 1) {
        let v = v_family(n, kh, a, Family::Two)?.v;
        if v <= v_hi {
            pool.push((Family::Two, n, v));
        }
    }

    let mut centers: Vec<f64> = pool.iter().map(|&(_, _, v)| v).collect();
    centers.sort_by(|x, y| x.partial_cmp(y).unwrap());
    centers.dedup_by(|x, y| (*x - *y).abs() <= 1e-9);

    let mut roots: Vec<f64> = Vec::new();
    for &c in &centers {
        // coarse flanks catch low-order roots that sit well off their
        // prediction; the fine core splits high-order root pairs
        let fine = doublet_step(kh, c.max(1.0), 2.0 * s2);
        let segments = [
            (c - 0.45 * s2, c - 0.12 * s2, 1e-3 * s2),
            (c - 0.12 * s2, c + 0.12 * s2, fine),
            (c + 0.12 * s2, c + 0.45 * s2, 1e-3 * s2),
        ];
        for (lo, hi, step) in segments {
            let lo = lo.max(1e-6);
            let hi = hi.min(v_hi);
            if hi <= lo {
                continue;
            }
            let points = (((hi - lo) / step).ceil() as usize + 2).max(8);
            let scan = find_modes_exact(&geometry, params, lo, hi, points)?;
            roots.extend(scan.modes.iter().map(|m| m.v));
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-9);

    // match each root to its nearest prediction within the gate
    let mut assigned: Vec<Option<usize>> = vec![None; roots.len()];
    for (ri, &v) in roots.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (pi, &(_, _, vp)) in pool.iter().enumerate() {
            let dist = (v - vp).abs();
            if dist > 0.25 * vp {
                continue;
            }
            // strict inequality keeps family 1 on coincident positions,
            // because family 1 entries precede family 2 in the pool
            if best.map_or(true, |(_, d)| dist < d) {
                best = Some((pi, dist));
            }
        }
        assigned[ri] = best.map(|(pi, _)| pi);
    }

    let mut used: Vec<bool> = vec![false; roots.len()];
    let mut rows = Vec::new();
    for fam in family.families() {
        for n in 1..=n_max {
            let Some(pi) = pool.iter().position(|&(f, m, _)| f == fam && m == n) else {
                continue;
            };
            let vp = pool[pi].2;
            let mut best: Option<(usize, f64)> = None;
            for (ri, a) in assigned.iter().enumerate() {
                if *a == Some(pi) {
                    let dist = (roots[ri] - vp).abs();
                    if best.map_or(true, |(_, d)| dist < d) {
                        best = Some((ri, dist));
                    }
                }
            }
            let v_exact = best.map(|(ri, _)| {
                used[ri] = true;
                roots[ri]
            });
            rows.push(CompareRow {
                family: fam.index(),
                n,
                v_asym: vp,
                v_exact,
                rel_err: v_exact.map(|v| (v - vp).abs() / vp),
                low_confidence: v_family(n, kh, a, fam)?.low_confidence,
            });
        }
    }

    let leftover_exact: Vec<f64> = roots
        .iter()
        .enumerate()
        .filter(|(ri, _)| !used[*ri])
        .map(|(_, &v)| v)
        .collect();

    Ok(CompareReport {
        kh,
        rows,
        leftover_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::delta_param;

    fn base_spec() -> SweepSpec {
        SweepSpec {
            case: CaseKind::A,
            epsilon: None,
            lambda: None,
            p_bar: 0.0,
            kh_min: 0.5,
            kh_max: 10.0,
            kh_steps: 200,
            modes: vec![1, 5, 10, 15, 25, 40, 55],
            family: FamilyChoice::One,
            compute_exact: false,
            v_max: None,
            alpha: None,
            beta: None,
            gamma: None,
        }
    }

    fn config_field(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_the_offending_field() {
        let mut s = base_spec();
        s.kh_min = 0.0;
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "kh_min");

        let mut s = base_spec();
        s.kh_max = 0.1;
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "kh_max");

        let mut s = base_spec();
        s.kh_steps = 0;
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "kh_steps");

        let mut s = base_spec();
        s.modes = vec![];
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "modes");

        let mut s = base_spec();
        s.modes = vec![1, 0];
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "modes");

        let mut s = base_spec();
        s.case = CaseKind::B;
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "epsilon");

        let mut s = base_spec();
        s.epsilon = Some(ValueList::One(1.0));
        s.lambda = Some(ValueList::One(2.0));
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "epsilon");

        let mut s = base_spec();
        s.alpha = Some(1.0);
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "alpha");

        let mut s = base_spec();
        s.case = CaseKind::Raw;
        s.alpha = Some(4.0);
        s.beta = Some(1.0);
        assert_eq!(config_field(run_sweep(&s).unwrap_err()), "gamma");
    }

    #[test]
    fn unsheared_rows_satisfy_the_family_law() {
        let rows = run_sweep(&base_spec()).unwrap();
        assert_eq!(rows.len(), 7 * 200);
        for r in &rows {
            assert!((r.v_asym * r.kh - r.n as f64 * PI).abs() < 1e-12);
            assert_eq!(r.epsilon, 0.0);
            assert_eq!(r.family, 1);
            assert!(r.v_exact.is_none() && r.rel_err.is_none());
            let expect_flag = r.n < 3;
            assert_eq!(r.flags == FLAG_LOW_CONFIDENCE, expect_flag, "n = {}", r.n);
        }
    }

    #[test]
    fn speeds_shrink_as_shear_grows() {
        let mut s = base_spec();
        s.case = CaseKind::B;
        s.epsilon = Some(ValueList::Many(vec![1.0, 5.0, 9.0, 19.0]));
        s.modes = vec![1, 7, 15, 21, 29, 37, 45];
        s.kh_steps = 20;
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 4 * 7 * 20);
        for i in &rows[..7 * 20] {
            for j in &rows[1..] {
                if j.n == i.n && j.kh == i.kh && j.epsilon > i.epsilon {
                    assert!(j.v_asym < i.v_asym, "n={} kh={}", i.n, i.kh);
                }
            }
        }
    }

    #[test]
    fn raw_moduli_drive_the_general_formula() {
        let mut s = base_spec();
        s.case = CaseKind::Raw;
        s.alpha = Some(4.0);
        s.beta = Some(1.0);
        s.gamma = Some(1.0);
        s.modes = vec![4];
        s.kh_min = 2.0;
        s.kh_max = 2.0;
        s.kh_steps = 1;
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 1);
        let delta = delta_param(4.0, 1.0, 1.0).unwrap();
        assert!((delta - 0.5).abs() < 1e-15);
        let expected = 4.0 * PI / (2.0 * (1.0 + delta).sqrt());
        assert!((rows[0].v_asym - expected).abs() < 1e-14);
        let lambda = 2.0_f64.sqrt();
        assert!((rows[0].epsilon - (lambda - 1.0 / lambda)).abs() < 1e-15);
    }

    #[test]
    fn rows_sort_by_shear_family_mode_and_wavenumber() {
        let mut s = base_spec();
        s.case = CaseKind::B;
        s.epsilon = Some(ValueList::Many(vec![5.0, 1.0, 5.0]));
        s.modes = vec![3, 1];
        s.family = FamilyChoice::Both;
        s.kh_steps = 3;
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 3);
        let key = |r: &SweepRow| (r.epsilon, r.family, r.n, r.kh);
        for w in rows.windows(2) {
            assert!(key(&w[0]) < key(&w[1]));
        }
    }

    #[test]
    fn csv_matches_the_reference_row() {
        let rows = vec![SweepRow {
            case: CaseKind::A,
            family: 1,
            n: 1,
            epsilon: 0.0,
            p_bar: 0.0,
            kh: PI,
            v_asym: 1.0,
            v_exact: None,
            rel_err: None,
            flags: String::new(),
        }];
        let mut buf = Vec::new();
        emit(&rows, EmitFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "case,family,n,epsilon,p_bar,kh,v_asym,v_exact,rel_err,flags\n\
             A,1,1,0,0,3.141592653589793,1,,,\n"
        );
    }

    #[test]
    fn empty_row_list_emits_header_or_empty_array() {
        let mut buf = Vec::new();
        emit(&[], EmitFormat::Csv, &mut buf).unwrap();
        assert_eq!(buf, b"case,family,n,epsilon,p_bar,kh,v_asym,v_exact,rel_err,flags\n");

        let mut buf = Vec::new();
        emit(&[], EmitFormat::Json, &mut buf).unwrap();
        assert_eq!(buf, b"[]\n");
    }

    #[test]
    fn repeated_runs_emit_identical_bytes() {
        let mut s = base_spec();
        s.kh_steps = 17;
        s.modes = vec![2, 9];
        let mut first = Vec::new();
        emit(&run_sweep(&s).unwrap(), EmitFormat::Csv, &mut first).unwrap();
        let mut second = Vec::new();
        emit(&run_sweep(&s).unwrap(), EmitFormat::Csv, &mut second).unwrap();
        assert_eq!(first, second);

        let mut json = Vec::new();
        emit(&run_sweep(&s).unwrap(), EmitFormat::Json, &mut json).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 2 * 17);
        assert_eq!(parsed[0]["case"], "A");
        assert_eq!(parsed[0]["v_exact"], serde_json::Value::Null);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let text = r#"{
            "case": "B",
            "epsilon": [1, 5],
            "modes": [1, 7],
            "family": "both",
            "kh_steps": 40
        }"#;
        let spec: SweepSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.family, FamilyChoice::Both);
        assert_eq!(spec.kh_min, 0.5);
        assert_eq!(spec.kh_max, 10.0);
        assert_eq!(spec.kh_steps, 40);
        assert!(!spec.compute_exact);

        let back = serde_json::to_string(&spec).unwrap();
        let again: SweepSpec = serde_json::from_str(&back).unwrap();
        assert_eq!(spec, again);

        let numeric: SweepSpec =
            serde_json::from_str(r#"{"case":"A","modes":[1],"family":2}"#).unwrap();
        assert_eq!(numeric.family, FamilyChoice::Two);

        let err = serde_json::from_str::<SweepSpec>(r#"{"case":"A","modes":[1],"family":3}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<SweepSpec>(r#"{"case":"A","modes":[1],"bogus":1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn single_point_exact_root_sits_near_the_prediction() {
        let mut s = base_spec();
        s.modes = vec![10];
        s.kh_min = 1.0;
        s.kh_max = 1.0;
        s.kh_steps = 1;
        s.compute_exact = true;
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert!((r.v_asym - 10.0 * PI).abs() < 1e-12);
        let v = r.v_exact.expect("an exact root within the matching gate");
        assert!(r.rel_err.unwrap() < 0.05);
        // the root pair on this branch straddles sqrt(1 + (n pi / kh)^2)
        let anchor = (1.0 + (10.0 * PI).powi(2)).sqrt();
        assert!((v - anchor).abs() < 1e-3, "v = {v}, anchor = {anchor}");
        assert_eq!(r.flags, "");
    }

    #[test]
    fn comparison_matches_each_prediction_to_its_nearest_root() {
        let params = case_a_params(1.0).unwrap();
        let report = compare_report(1.0, &params, 6, FamilyChoice::Both).unwrap();
        assert_eq!(report.kh, 1.0);
        assert_eq!(report.rows.len(), 12);

        let fam1: Vec<_> = report.rows.iter().filter(|r| r.family == 1).collect();
        assert_eq!(fam1.len(), 6);
        for (i, r) in fam1.iter().enumerate() {
            assert_eq!(r.n as usize, i + 1);
            assert!((r.v_asym - r.n as f64 * PI).abs() < 1e-12);
            let v = r.v_exact.expect("family 1 prediction should match a root");
            assert!((v - (1.0 + (r.n as f64 * PI).powi(2)).sqrt()).abs() < 1e-2);
            assert_eq!(r.rel_err.unwrap(), (v - r.v_asym).abs() / r.v_asym);
            assert_eq!(r.low_confidence, r.n < 3);
        }

        let fam2: Vec<_> = report.rows.iter().filter(|r| r.family == 2).collect();
        assert_eq!(fam2.len(), 6);
        let lowest = fam2[0].v_exact.expect("fundamental mode");
        assert!((lowest - 1.3867411257609015).abs() < 1e-6);
        for r in &fam2 {
            // even-index predictions coincide with family 1 and lose the tie
            if r.n % 2 == 0 {
                assert!(r.v_exact.is_none(), "n = {}", r.n);
            }
        }

        let v_hi = 6.5 * PI;
        for &v in &report.leftover_exact {
            assert!(v > 0.0 && v <= v_hi + 1e-9);
            for r in &report.rows {
                if let Some(shown) = r.v_exact {
                    assert!((shown - v).abs() > 1e-12);
                }
            }
        }

        let again = compare_report(1.0, &params, 6, FamilyChoice::Both).unwrap();
        assert_eq!(report, again);

        assert_eq!(
            config_field(compare_report(1.0, &params, 0, FamilyChoice::Both).unwrap_err()),
            "n_max"
        );
    }
}
