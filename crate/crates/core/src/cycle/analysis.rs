//! Fixed points, Lyapunov-coefficient sign and invariant circles of `T_ij`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::CycleModelConfig;
use super::dictionary::{admissible, params_for_target_with, rescale_params_with, tau, Dictionary};
use super::model::{ChartMap, CyclePoint, Precision, ReturnMap, ReturnSpec, ShilnikovPoint};
use crate::circle::{detect, CircleReport, DetectOptions};
use crate::error::{Error, Result};
use crate::henon::{self, HenonParams};
use crate::jet::{complex_adapt, extract_real_jet, AdaptBasis, DiffScheme, PlanarMap, Poly2, UnitMultiplier};
use crate::normal_form::{lc_direct, lc_oracle};

pub const NEWTON_MAX_STEPS: usize = 100;
pub const ON_CIRCLE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleFixedPoint {
    pub which: Which,
    /// Position in the rescaled chart.
    pub chart: [f64; 2],
    pub point: ShilnikovPoint,
    pub raw: CyclePoint,
    /// Leading pair first, then the strong-stable multipliers.
    pub spectrum: Vec<Complex64>,
    pub leading: [Complex64; 2],
    /// Hénon `P±` multipliers at the literal dictionary's parameters.
    pub henon_reference: Option<[Complex64; 2]>,
    /// Hénon `P±` multipliers at the conjugate dictionary's parameters.
    pub conjugate_reference: Option<[Complex64; 2]>,
}

/// Distance between two unordered multiplier pairs.
pub fn pair_error(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
    let direct = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let swapped = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    direct.min(swapped)
}

fn eig2(j: [[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let r = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    [tr / 2.0 + r, tr / 2.0 - r]
}

fn chart_jacobian(map: &ReturnMap, p: [f64; 2]) -> [[f64; 2]; 2] {
    let x = Poly2::var_first(1) + p[0];
    let y = Poly2::var_second(1) + p[1];
    let (fx, fy) = map.chart(x, y);
    [[fx.get(1, 0), fx.get(0, 1)], [fy.get(1, 0), fy.get(0, 1)]]
}

/// Newton on `chart(p) − p`, deflated by the known roots so that repeated
/// starts cannot fall back into them.
fn newton(map: &ReturnMap, seed: [f64; 2], known: &[[f64; 2]]) -> Option<[f64; 2]> {
    let mut p = seed;
    for _ in 0..NEWTON_MAX_STEPS {
        let (fx, fy) = map.chart(p[0], p[1]);
        let f = [fx - p[0], fy - p[1]];
        let j = chart_jacobian(map, p);
        let mut a = [[j[0][0] - 1.0, j[0][1]], [j[1][0], j[1][1] - 1.0]];
        // G = m·F with m = Π (1 + 1/|p − r|²); ∇G = m·∇F + F ⊗ ∇m
        let mut m = 1.0;
        let mut grad = [0.0, 0.0];
        for r in known {
            let d = [p[0] - r[0], p[1] - r[1]];
            let n2 = d[0] * d[0] + d[1] * d[1];
            if n2 == 0.0 {
                return None;
            }
            let mk = 1.0 + 1.0 / n2;
            let gk = [-2.0 * d[0] / (n2 * n2), -2.0 * d[1] / (n2 * n2)];
            grad = [grad[0] * mk + m * gk[0], grad[1] * mk + m * gk[1]];
            m *= mk;
        }
        let g = [m * f[0], m * f[1]];
        for (r, row) in a.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = m * *v + f[r] * grad[k];
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (a[1][1] * g[0] - a[0][1] * g[1]) / det;
        let dy = (a[0][0] * g[1] - a[1][0] * g[0]) / det;
        p = [p[0] - dx, p[1] - dy];
        if !(p[0].is_finite() && p[1].is_finite()) || p[0].abs().max(p[1].abs()) > 1e8 {
            return None;
        }
        if dx.abs().max(dy.abs()) <= 1e-14 * (1.0 + p[0].abs().max(p[1].abs())) {
            let (gx, gy) = map.chart(p[0], p[1]);
            let resid = (gx - p[0]).abs().max((gy - p[1]).abs());
            return (resid <= 1e-10 * (1.0 + p[0].abs().max(p[1].abs()))).then_some(p);
        }
    }
    None
}

fn henon_multipliers(p: &HenonParams, which: Which) -> Option<[Complex64; 2]> {
    let fp = henon::fixed_points(p).ok()?;
    Some(match which {
        Which::Plus => fp.plus.multipliers,
        Which::Minus => fp.minus.multipliers,
    })
}

/// Newton on the planar return in chart coordinates. `P₊` is the fixed point
/// with trace below `1 + det` (for Hénon, `tr P± = −2X±` and the traces sum
/// to `2(1 + M₂)`).
pub fn find_fixed_point(
    cfg: &CycleModelConfig,
    spec: &ReturnSpec,
    which: Which,
    precision: Precision,
) -> Result<CycleFixedPoint> {
    let adm = admissible(cfg, spec);
    if !adm.admissible {
        return Err(Error::Inadmissible(adm.ratio));
    }
    let map = ReturnMap::new(cfg, spec, precision)?;
    let literal = rescale_params_with(cfg, spec, Dictionary::Literal, precision)?;
    let conjugate = rescale_params_with(cfg, spec, Dictionary::Conjugate, precision)?;

    let mut seeds = Vec::new();
    for p in [&literal, &conjugate] {
        if let Ok(fp) = henon::fixed_points(p) {
            let want = match which {
                Which::Plus => fp.plus.location,
                Which::Minus => fp.minus.location,
            };
            seeds.push(want);
        }
    }
    let reach = seeds
        .iter()
        .map(|s| s[0].abs().max(s[1].abs()))
        .fold(2.0, f64::max)
        + 1.0;
    let grid: Vec<[f64; 2]> = (0..9)
        .flat_map(|a| (0..9).map(move |b| (a, b)))
        .map(|(a, b)| [reach * (a as f64 / 4.0 - 1.0), reach * (b as f64 / 4.0 - 1.0)])
        .collect();

    let checked = ChartMap {
        map: &map,
        check_itinerary: true,
    };
    let classify = |p: [f64; 2]| -> Which {
        let j = chart_jacobian(&map, p);
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if tr < 1.0 + det {
            Which::Plus
        } else {
            Which::Minus
        }
    };
    let mut itinerary_err = None;
    let mut accept = |p: [f64; 2]| -> bool {
        if classify(p) != which {
            return false;
        }
        match checked.apply(p) {
            Ok(_) => true,
            Err(e) => {
                itinerary_err.get_or_insert(e);
                false
            }
        }
    };
    let candidates: Vec<[f64; 2]> = seeds.iter().chain(grid.iter()).copied().collect();
    let mut roots: Vec<[f64; 2]> = Vec::new();
    let mut found = None;
    'search: for deflate in [false, true] {
        for &s in &candidates {
            let known = if deflate { roots.clone() } else { Vec::new() };
            let Some(p) = newton(&map, s, &known) else { continue };
            let near = |r: &[f64; 2]| (r[0] - p[0]).abs().max((r[1] - p[1]).abs()) <= 1e-8 * (1.0 + p[0].abs().max(p[1].abs()));
            if roots.iter().any(near) {
                continue;
            }
            roots.push(p);
            if accept(p) {
                found = Some(p);
                break 'search;
            }
        }
    }
    let chart = match found {
        Some(p) => p,
        None => {
            return Err(itinerary_err.unwrap_or_else(|| {
                Error::NewtonFailed(format!("no {which:?} fixed point within {NEWTON_MAX_STEPS} steps"))
            }))
        }
    };

    let planar = map.from_chart(chart, map.zero_u());
    let ups = map.upsilon_fixed(&planar)?;
    let point = map.from_chart(chart, ups);
    let leading = eig2(chart_jacobian(&map, chart));
    let jac = map.jacobian(&point);
    let n = cfg.ss_dim;
    let ss_block = jac.view((2, 2), (n, n)).into_owned();
    let mut spectrum = leading.to_vec();
    spectrum.extend(ss_block.complex_eigenvalues().iter().copied());
    Ok(CycleFixedPoint {
        which,
        chart,
        raw: map.from_shilnikov(&point),
        point,
        spectrum,
        leading,
        henon_reference: henon_multipliers(&literal, which),
        conjugate_reference: henon_multipliers(&conjugate, which),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LcSign {
    pub sign: f64,
    pub psi: f64,
    pub lc_direct: f64,
    pub lc_oracle: f64,
    pub chart: [f64; 2],
}

/// Sign of the Lyapunov coefficient of `T_ij` restricted to `{u = 0}` at `P₊`.
pub fn reduced_lc_sign(cfg: &CycleModelConfig, spec: &ReturnSpec, precision: Precision) -> Result<LcSign> {
    let zero = |v: &Vec<f64>| v.iter().all(|&x| x == 0.0);
    if !cfg.is_decoupled() || !zero(&cfg.u1in) || !zero(&cfg.u2in) {
        return Err(Error::Coupled);
    }
    let fp = find_fixed_point(cfg, spec, Which::Plus, precision)?;
    let off = fp
        .leading
        .iter()
        .map(|l| (l.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if off > ON_CIRCLE_TOL || fp.leading[0].im == 0.0 {
        return Err(Error::OffCircle(off));
    }
    let map = ReturnMap::new(cfg, spec, precision)?;
    let planar = ChartMap {
        map: &map,
        check_itinerary: false,
    };
    let rj = extract_real_jet(&planar, fp.chart, DiffScheme::Exact)?;
    let jet = complex_adapt(&rj, AdaptBasis::UnitNorm)?;
    let mult = UnitMultiplier::new(jet.nu().arg())?;
    let direct = lc_direct(&jet, &mult)?;
    let oracle = lc_oracle(&jet, &mult)?;
    Ok(LcSign {
        sign: direct.lc.signum(),
        psi: mult.psi(),
        lc_direct: direct.lc,
        lc_oracle: oracle.lc,
        chart: fp.chart,
    })
}

/// Spec with `M₂ = 1` and the given `M₁`, i.e. `P₊` on the unit circle.
pub fn ns_tuned_spec(
    cfg: &CycleModelConfig,
    i: u32,
    j: u32,
    m1: f64,
    dictionary: Dictionary,
    precision: Precision,
) -> Result<ReturnSpec> {
    params_for_target_with(cfg, i, j, HenonParams::new(m1, 1.0), dictionary, precision)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReturnCircle {
    pub report: CircleReport,
    pub tau: u32,
    pub fixed_point: [f64; 2],
    pub params: HenonParams,
}

pub const RETURN_CIRCLE_MAX_DELTA: f64 = 0.05;

/// Circle detection on the planar return near `P₊`, in chart coordinates.
pub fn return_circle(
    cfg: &CycleModelConfig,
    spec: &ReturnSpec,
    dictionary: Dictionary,
    precision: Precision,
    opts: &DetectOptions,
) -> Result<ReturnCircle> {
    if cfg.orientation(spec.i, spec.j) != 1.0 {
        return Err(Error::NegativeOrientation { i: spec.i, j: spec.j });
    }
    let params = rescale_params_with(cfg, spec, dictionary, precision)?;
    if !(params.m1 > 0.0 && params.m1 < 3.0) || (params.m1 - 1.25).abs() < 0.05 {
        return Err(Error::Margin {
            name: "m1",
            value: params.m1,
            rule: "0 < m1 < 3, at least 0.05 from 5/4",
        });
    }
    let delta = params.m2 - 1.0;
    if !(delta != 0.0 && delta.abs() <= RETURN_CIRCLE_MAX_DELTA) {
        return Err(Error::Margin {
            name: "delta",
            value: delta,
            rule: "0 < |m2 - 1| <= 0.05",
        });
    }
    let fp = find_fixed_point(cfg, spec, Which::Plus, precision)?;
    let map = ReturnMap::new(cfg, spec, precision)?;
    let planar = ChartMap {
        map: &map,
        check_itinerary: true,
    };
    let seed = [fp.chart[0] + 1e-3, fp.chart[1]];
    Ok(ReturnCircle {
        report: detect(&planar, seed, opts),
        tau: tau(spec.i, spec.j),
        fixed_point: fp.chart,
        params,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub i: u32,
    pub j: u32,
    pub m1: f64,
    pub m2: f64,
    pub mult_err: f64,
    pub det_err: f64,
    pub ss_max: f64,
    pub lc_sign: f64,
    pub circle_verdict: String,
    pub tau: u32,
}

/// One row per `(i, j)`: multiplier and determinant errors against Hénon `P₊`
/// at `target`, the reduced LC sign at the matching `M₂ = 1` point, and the
/// circle verdict. Failures are reported in the row, not as errors.
pub fn convergence_study(
    cfg: &CycleModelConfig,
    target: HenonParams,
    pairs: &[(u32, u32)],
    dictionary: Dictionary,
    precision: Precision,
    opts: &DetectOptions,
) -> Result<Vec<ConvergenceRow>> {
    let reference = henon::fixed_points(&target)?.plus.multipliers;
    Ok(pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut row = ConvergenceRow {
                i,
                j,
                m1: target.m1,
                m2: target.m2,
                mult_err: f64::NAN,
                det_err: f64::NAN,
                ss_max: f64::NAN,
                lc_sign: f64::NAN,
                circle_verdict: String::new(),
                tau: tau(i, j),
            };
            let spec = match params_for_target_with(cfg, i, j, target, dictionary, precision) {
                Ok(s) => s,
                Err(e) => {
                    row.circle_verdict = format!("error: {e}");
                    return row;
                }
            };
            match find_fixed_point(cfg, &spec, Which::Plus, precision) {
                Ok(fp) => {
                    row.mult_err = pair_error(fp.leading, reference);
                    row.det_err = ((fp.leading[0] * fp.leading[1]).re - target.m2).abs();
                    row.ss_max = fp.spectrum[2..].iter().map(|l| l.norm()).fold(0.0, f64::max);
                }
                Err(e) => {
                    row.circle_verdict = format!("error: {e}");
                    return row;
                }
            }
            row.lc_sign = ns_tuned_spec(cfg, i, j, target.m1, Dictionary::Conjugate, precision)
                .and_then(|s| reduced_lc_sign(cfg, &s, precision))
                .map(|r| r.sign)
                .unwrap_or(f64::NAN);
            row.circle_verdict = match return_circle(cfg, &spec, dictionary, precision, opts) {
                Ok(rc) => rc.report.verdict.as_str().to_string(),
                Err(e) => format!("error: {e}"),
            };
            row
        })
        .collect())
}
