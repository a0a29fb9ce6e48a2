//! Quadratic and cubic normalization at an elliptic fixed point, and three
//! routes to the Lyapunov coefficient.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::poly::monomials;
use crate::jet::{compose, conjugate, PlanarJet, UnitMultiplier};

pub const DIVISOR_TOL: f64 = 1e-6;
pub const RADIAL_ANGLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Quadratic,
    Cubic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationResult {
    pub normalized: PlanarJet,
    /// The accumulated coordinate change `tr`.
    pub change: PlanarJet,
    pub stage: Stage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DirectFormula,
    CompositionOracle,
    /// Reads the cubic term of `tr ∘ map` without `tr⁻¹`.
    PartialIncorrect,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovValue {
    #[serde(serialize_with = "ser_complex")]
    pub alpha: Complex64,
    pub lc: f64,
    pub method: Method,
}

fn ser_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [c.re, c.im].serialize(s)
}

impl LyapunovValue {
    fn new(alpha: Complex64, nu: Complex64, method: Method) -> Self {
        Self {
            alpha,
            lc: (nu.conj() * alpha).re,
            method,
        }
    }
}

fn divisor(nu: Complex64, p: usize, q: usize) -> Complex64 {
    nu - nu.powu(p as u32) * nu.conj().powu(q as u32)
}

fn check(jet: &PlanarJet, mult: &UnitMultiplier) -> Result<()> {
    mult.require_regular()?;
    jet.require_adapted()?;
    let gap = (jet.nu() - mult.nu()).norm();
    if gap > 1e-12 {
        return Err(Error::NotAdapted(format!("linear part differs from nu by {gap:e}")));
    }
    Ok(())
}

/// Near-identity change removing the homogeneous terms of degree `n`, except `skip`.
fn homological_change(
    jet: &PlanarJet,
    nu: Complex64,
    n: usize,
    skip: Option<(usize, usize)>,
) -> Result<PlanarJet> {
    let mut tr = PlanarJet::identity(jet.degree())?;
    for (p, q) in monomials(n).filter(|&(p, q)| p + q == n && Some((p, q)) != skip) {
        let d = divisor(nu, p, q);
        if d.norm() < DIVISOR_TOL {
            return Err(Error::SmallDivisor { p, q, divisor: d.norm() });
        }
        tr = tr.with_coeff(p, q, jet.coeff(p, q) / d);
    }
    Ok(tr)
}

/// `tr(z) = z + Σ_{p+q=2} c_pq / (ν − ν^p ν̄^q) z^p z̄^q`.
pub fn quadratic_change(jet: &PlanarJet, mult: &UnitMultiplier) -> Result<PlanarJet> {
    check(jet, mult)?;
    homological_change(jet, mult.nu(), 2, None)
}

pub fn normalize_quadratic(jet: &PlanarJet, mult: &UnitMultiplier) -> Result<NormalizationResult> {
    let change = quadratic_change(jet, mult)?;
    let normalized = conjugate(jet, &change)?;
    Ok(NormalizationResult {
        normalized,
        change,
        stage: Stage::Quadratic,
    })
}

/// Removes every cubic term except the resonant `z²z̄`.
pub fn normalize_cubic(result: &NormalizationResult, mult: &UnitMultiplier) -> Result<NormalizationResult> {
    if result.stage != Stage::Quadratic {
        return Err(Error::NotAdapted("normalize_cubic expects a quadratic-stage result".into()));
    }
    check(&result.normalized, mult)?;
    let tr3 = homological_change(&result.normalized, mult.nu(), 3, Some((2, 1)))?;
    let normalized = conjugate(&result.normalized, &tr3)?;
    let change = compose(&tr3, &result.change)?;
    Ok(NormalizationResult {
        normalized,
        change,
        stage: Stage::Cubic,
    })
}

/// Closed-form `α` in terms of the adapted jet coefficients.
pub fn lc_direct(jet: &PlanarJet, mult: &UnitMultiplier) -> Result<LyapunovValue> {
    check(jet, mult)?;
    let nu = mult.nu();
    let nb = nu.conj();
    let z20 = jet.coeff(2, 0);
    let z11 = jet.coeff(1, 1);
    let z02 = jet.coeff(0, 2);
    let z21 = jet.coeff(2, 1);
    // half-angle forms: ν − 1 = 2i·sin(ψ/2)·e^{iψ/2}, ν³ + ν̄³ − 2 = −4 sin²(3ψ/2)
    let psi = mult.psi();
    let nu_m1 = Complex64::from_polar(2.0 * (psi / 2.0).sin(), psi / 2.0 + std::f64::consts::FRAC_PI_2);
    let d02 = Complex64::new(-4.0 * (1.5 * psi).sin().powi(2), 0.0);
    let d11 = nu_m1.conj().powu(2);
    let d20 = nu_m1.powu(2);
    for (d, p, q) in [(d02, 0, 2), (d11, 1, 1), (d20, 2, 0)] {
        if d.norm() < DIVISOR_TOL {
            return Err(Error::SmallDivisor { p, q, divisor: d.norm() });
        }
    }
    let alpha = z21 + z02.norm_sqr() * (4.0 * nu - 2.0 * nb * nb) / d02 + z11.norm_sqr() * (2.0 - nb) / d11
        - z11 * z20 * (-6.0 + 2.0 * nu + nb) / d20;
    Ok(LyapunovValue::new(alpha, nu, Method::DirectFormula))
}

/// Reads `α` from `tr ∘ map ∘ tr⁻¹` computed by jet composition.
pub fn lc_oracle(jet: &PlanarJet, mult: &UnitMultiplier) -> Result<LyapunovValue> {
    let res = normalize_quadratic(jet, mult)?;
    Ok(LyapunovValue::new(
        res.normalized.coeff(2, 1),
        mult.nu(),
        Method::CompositionOracle,
    ))
}

/// Reads the cubic coefficient of `tr ∘ map`, skipping `tr⁻¹`.
pub fn lc_partial_incorrect(jet: &PlanarJet, mult: &UnitMultiplier) -> Result<LyapunovValue> {
    let tr = quadratic_change(jet, mult)?;
    let partial = compose(&tr, jet)?;
    Ok(LyapunovValue::new(partial.coeff(2, 1), mult.nu(), Method::PartialIncorrect))
}

/// Fits `(|ζ̃| − |ζ|)/|ζ|³ = a + b·|ζ|²` over circles of the given radii and
/// returns `a`. A single radius returns the angular mean.
pub fn radial_check(result: &NormalizationResult, mult: &UnitMultiplier, radii: &[f64]) -> Result<f64> {
    if radii.is_empty() {
        return Err(Error::Empty("radii"));
    }
    if result.stage != Stage::Cubic {
        return Err(Error::NotAdapted("radial_check expects a cubic-stage result".into()));
    }
    mult.require_regular()?;
    for &r in radii {
        if !(r > 0.0 && r <= 0.1) {
            return Err(Error::OutOfDomain {
                value: r,
                domain: "(0, 0.1]",
            });
        }
    }
    let mut samples = Vec::with_capacity(radii.len() * RADIAL_ANGLES);
    for &r in radii {
        for k in 0..RADIAL_ANGLES {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / RADIAL_ANGLES as f64;
            let z = Complex64::from_polar(r, theta);
            let w = result.normalized.eval(z);
            samples.push((r * r, (w.norm() - r) / (r * r * r)));
        }
    }
    let n = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mean_x).powi(2)).sum();
    if sxx <= f64::EPSILON * mean_x * mean_x * n {
        return Ok(mean_y);
    }
    let sxy: f64 = samples.iter().map(|s| (s.0 - mean_x) * (s.1 - mean_y)).sum();
    Ok(mean_y - sxy / sxx * mean_x)
}
