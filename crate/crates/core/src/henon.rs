//! The standard Hénon map `X̄ = Y, Ȳ = M₁ − M₂X − Y²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{InvertibleMap, PlanarJet, PlanarMap, Poly2, UnitMultiplier};
use crate::normal_form::{lc_direct, lc_oracle, lc_partial_incorrect};

pub const LOCUS_TOL: f64 = 1e-10;
/// Scan nodes closer than this to π/2 or 2π/3 are skipped.
pub const SCAN_GAP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HenonParams {
    pub m1: f64,
    pub m2: f64,
}

impl HenonParams {
    pub fn new(m1: f64, m2: f64) -> Self {
        Self { m1, m2 }
    }
}

pub fn apply(p: &HenonParams, pt: [f64; 2]) -> [f64; 2] {
    [pt[1], p.m1 - p.m2 * pt[0] - pt[1] * pt[1]]
}

pub fn inverse(p: &HenonParams, pt: [f64; 2]) -> Result<[f64; 2]> {
    if p.m2 == 0.0 {
        return Err(Error::NotInvertible);
    }
    let (xb, yb) = (pt[0], pt[1]);
    Ok([(p.m1 - yb - xb * xb) / p.m2, xb])
}

impl PlanarMap for HenonParams {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        Ok(apply(self, p))
    }

    fn polynomial_expansion(&self, at: [f64; 2], degree: usize) -> Option<[Poly2<f64>; 2]> {
        let x = Poly2::var_first(degree) + at[0];
        let y = Poly2::var_second(degree) + at[1];
        let second = Poly2::constant(degree, self.m1) - x * self.m2 - y.clone() * y.clone();
        Some([y, second])
    }
}

impl InvertibleMap for HenonParams {
    fn apply_inverse(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        inverse(self, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Saddle,
    Node,
    Focus,
    Elliptic,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointInfo {
    pub location: [f64; 2],
    pub multipliers: [Complex64; 2],
    pub kind: FixedPointKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPoints {
    pub plus: FixedPointInfo,
    pub minus: FixedPointInfo,
}

/// Roots of `λ² + 2xλ + M₂` (the multipliers at the fixed point `(x, x)`).
pub fn multipliers_at(m2: f64, x: f64) -> [Complex64; 2] {
    let r = Complex64::new(x * x - m2, 0.0).sqrt();
    [-x + r, -x - r]
}

fn classify(m: [Complex64; 2]) -> FixedPointKind {
    let near = |a: Complex64, b: f64| (a - b).norm() <= LOCUS_TOL;
    if m.iter().any(|&l| near(l, 1.0) || near(l, -1.0)) {
        return FixedPointKind::Degenerate;
    }
    if m[0].im.abs() > 0.0 {
        if (m[0].norm() - 1.0).abs() <= LOCUS_TOL {
            FixedPointKind::Elliptic
        } else {
            FixedPointKind::Focus
        }
    } else {
        let inside = m.iter().filter(|l| l.norm() < 1.0).count();
        if inside == 1 {
            FixedPointKind::Saddle
        } else {
            FixedPointKind::Node
        }
    }
}

fn info(p: &HenonParams, x: f64) -> FixedPointInfo {
    let multipliers = multipliers_at(p.m2, x);
    FixedPointInfo {
        location: [x, x],
        multipliers,
        kind: classify(multipliers),
    }
}

pub fn fixed_points(p: &HenonParams) -> Result<FixedPoints> {
    let b = 1.0 + p.m2;
    let disc = b * b + 4.0 * p.m1;
    if disc.abs() <= 1e-12 * (b * b).max(1.0) {
        return Err(Error::SaddleNodeBoundary { x: -b / 2.0 });
    }
    if disc < 0.0 {
        return Err(Error::NoFixedPoints { disc });
    }
    let s = disc.sqrt();
    // Avoid cancellation in the smaller-magnitude root.
    let (xp, xm) = if b >= 0.0 {
        let xm = (-b - s) / 2.0;
        (-p.m1 / xm, xm)
    } else {
        let xp = (-b + s) / 2.0;
        (xp, -p.m1 / xp)
    };
    Ok(FixedPoints {
        plus: info(p, xp),
        minus: info(p, xm),
    })
}

pub fn m1_from_psi(psi: f64) -> f64 {
    let c = psi.cos();
    c * c - 2.0 * c
}

pub fn psi_from_m1(m1: f64) -> Result<f64> {
    if !(m1 > -1.0 && m1 < 3.0) {
        return Err(Error::OutOfDomain {
            value: m1,
            domain: "(-1, 3)",
        });
    }
    Ok((1.0 - (1.0 + m1).sqrt()).acos())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Loci {
    pub on_lplus: bool,
    pub on_lminus: bool,
    pub on_lomega: bool,
    pub b_plus_plus: bool,
    pub b_minus_minus: bool,
    pub b_plus_minus: bool,
    pub c1_omega: bool,
    pub c2_omega: bool,
}

pub fn bifurcation_loci(p: &HenonParams) -> Loci {
    let at = |m1: f64, m2: f64| (p.m1 - m1).abs() <= LOCUS_TOL && (p.m2 - m2).abs() <= LOCUS_TOL;
    let b = 1.0 + p.m2;
    Loci {
        on_lplus: (p.m1 + b * b / 4.0).abs() <= LOCUS_TOL,
        on_lminus: (p.m1 - 3.0 * b * b / 4.0).abs() <= LOCUS_TOL,
        on_lomega: (p.m2 - 1.0).abs() <= LOCUS_TOL && p.m1 > -1.0 && p.m1 < 3.0,
        b_plus_plus: at(-1.0, 1.0),
        b_minus_minus: at(3.0, 1.0),
        b_plus_minus: at(0.0, -1.0),
        c1_omega: at(0.0, 1.0),
        c2_omega: at(1.25, 1.0),
    }
}

/// Adapted jet at `P₊` on `Lω` in the basis `X = U, Y = cos ψ U − sin ψ V`.
pub fn henon_adapted_jet(psi: f64) -> Result<PlanarJet> {
    if !(psi > 0.0 && psi < PI) {
        return Err(Error::PsiOutOfRange(psi));
    }
    let s = psi.sin();
    if s == 0.0 {
        return Err(Error::PsiOutOfRange(psi));
    }
    let nu = Complex64::new(psi.cos(), s);
    let i = Complex64::i();
    PlanarJet::from_terms(
        3,
        &[
            ((1, 0), nu),
            ((2, 0), i * nu * nu / (4.0 * s)),
            ((1, 1), i / (2.0 * s)),
            ((0, 2), i * nu.conj() * nu.conj() / (4.0 * s)),
        ],
    )
}

/// `𝓛(ψ) = cos ψ / (4 (cos ψ − 1)² (1 + 2 cos ψ)²)`.
pub fn lc_closed_form(psi: f64) -> Result<f64> {
    if !(psi > 0.0 && psi < PI) {
        return Err(Error::PsiOutOfRange(psi));
    }
    // cos ψ − 1 = −2 sin²(ψ/2), 1 + 2cos ψ = −4 sin((ψ + 2π/3)/2) sin((ψ − 2π/3)/2)
    let third = 2.0 * PI / 3.0;
    let cm1 = -2.0 * (psi / 2.0).sin().powi(2);
    let pole = -4.0 * ((psi + third) / 2.0).sin() * ((psi - third) / 2.0).sin();
    if pole.abs() < 1e-8 {
        return Err(Error::Pole(psi));
    }
    Ok(psi.cos() / (4.0 * cm1 * cm1 * pole * pole))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LomegaRow {
    pub psi: f64,
    pub m1: f64,
    pub lc_closed: f64,
    pub lc_direct: f64,
    pub lc_oracle: f64,
    pub lc_incorrect: f64,
}

impl LomegaRow {
    pub fn identity_ok(&self) -> bool {
        (self.lc_direct - self.lc_closed).abs() <= 1e-10
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanGap {
    pub label: &'static str,
    pub psi: f64,
    /// Nearest retained nodes on either side.
    pub below: f64,
    pub above: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LomegaScan {
    pub rows: Vec<LomegaRow>,
    pub gaps: Vec<ScanGap>,
}

/// Midpoint grid `ψ_k = π(k + ½)/n`, minus nodes within [`SCAN_GAP`] of π/2 and 2π/3.
pub fn lomega_scan(n: usize) -> Result<LomegaScan> {
    if n < 2 {
        return Err(Error::OutOfDomain {
            value: n as f64,
            domain: "n >= 2",
        });
    }
    let nodes: Vec<f64> = (0..n)
        .map(|k| PI * (k as f64 + 0.5) / n as f64)
        .filter(|&psi| (psi - PI / 2.0).abs() > SCAN_GAP && (psi - 2.0 * PI / 3.0).abs() > SCAN_GAP)
        .collect();
    let rows = nodes
        .par_iter()
        .map(|&psi| -> Result<LomegaRow> {
            let jet = henon_adapted_jet(psi)?;
            let mult = UnitMultiplier::new(psi)?;
            Ok(LomegaRow {
                psi,
                m1: m1_from_psi(psi),
                lc_closed: lc_closed_form(psi)?,
                lc_direct: lc_direct(&jet, &mult)?.lc,
                lc_oracle: lc_oracle(&jet, &mult)?.lc,
                lc_incorrect: lc_partial_incorrect(&jet, &mult)?.lc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps = [("C1omega: zero of L", PI / 2.0), ("C2omega: pole of L", 2.0 * PI / 3.0)]
        .into_iter()
        .map(|(label, psi)| ScanGap {
            label,
            psi,
            below: rows.iter().map(|r| r.psi).filter(|&x| x < psi).fold(f64::NAN, f64::max),
            above: rows.iter().map(|r| r.psi).filter(|&x| x > psi).fold(f64::NAN, f64::min),
        })
        .collect();
    Ok(LomegaScan { rows, gaps })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub label: &'static str,
    /// `(M₁, M₂)` samples.
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Marker {
    pub label: &'static str,
    pub m1: f64,
    pub m2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagram {
    pub curves: Vec<Curve>,
    pub markers: Vec<Marker>,
}

pub const MARKED_POINTS: [(&str, f64, f64); 5] = [
    ("B++", -1.0, 1.0),
    ("B--", 3.0, 1.0),
    ("B+-", 0.0, -1.0),
    ("C1", 0.0, 1.0),
    ("C2", 1.25, 1.0),
];

pub fn diagram_data(m2_lo: f64, m2_hi: f64, resolution: usize) -> Result<Diagram> {
    if resolution < 2 {
        return Err(Error::OutOfDomain {
            value: resolution as f64,
            domain: "resolution >= 2",
        });
    }
    if !(m2_lo < m2_hi) || !m2_lo.is_finite() || !m2_hi.is_finite() {
        return Err(Error::OutOfDomain {
            value: m2_lo,
            domain: "m2 range with lo < hi",
        });
    }
    let grid = |a: f64, b: f64| -> Vec<f64> {
        (0..resolution)
            .map(|k| a + (b - a) * k as f64 / (resolution - 1) as f64)
            .collect()
    };
    let m2s = grid(m2_lo, m2_hi);
    let mut curves = vec![
        Curve {
            label: "L+",
            points: m2s.iter().map(|&m2| [-(1.0 + m2).powi(2) / 4.0, m2]).collect(),
        },
        Curve {
            label: "L-",
            points: m2s.iter().map(|&m2| [3.0 * (1.0 + m2).powi(2) / 4.0, m2]).collect(),
        },
    ];
    if (m2_lo..=m2_hi).contains(&1.0) {
        curves.push(Curve {
            label: "Lomega",
            points: grid(-1.0, 3.0).into_iter().map(|m1| [m1, 1.0]).collect(),
        });
    }
    let markers = MARKED_POINTS
        .iter()
        .filter(|(_, _, m2)| (m2_lo..=m2_hi).contains(m2))
        .map(|&(label, m1, m2)| Marker { label, m1, m2 })
        .collect();
    Ok(Diagram { curves, markers })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_example() {
        let p = HenonParams::new(0.3, -0.7);
        assert_eq!(apply(&p, [1.0, 2.0]), [2.0, 0.3 + 0.7 - 4.0]);
    }

    #[test]
    fn origin_fixed_at_0_1() {
        let p = HenonParams::new(0.0, 1.0);
        assert_eq!(apply(&p, [0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(inverse(&p, [0.0, 0.0]).unwrap(), [0.0, 0.0]);
        assert_eq!(inverse(&HenonParams::new(1.0, 0.0), [0.0, 0.0]), Err(Error::NotInvertible));
    }

    #[test]
    fn kinds() {
        let fp = fixed_points(&HenonParams::new(0.0, 1.0)).unwrap();
        assert_eq!(fp.plus.kind, FixedPointKind::Elliptic);
        assert_eq!(fp.minus.kind, FixedPointKind::Saddle);
        let fp = fixed_points(&HenonParams::new(1.0, 0.98)).unwrap();
        assert_eq!(fp.plus.kind, FixedPointKind::Focus);
    }
}
