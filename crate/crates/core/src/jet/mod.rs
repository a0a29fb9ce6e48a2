//! Truncated jets of planar map germs in `z` and `z̄`.

pub mod extract;
pub mod poly;
pub mod real;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
pub use extract::{extract_real_jet, DiffScheme, InvertibleMap, PlanarMap};
pub use poly::Poly2;
pub use real::{complex_adapt, AdaptBasis, RealPlanarJet};

pub const ADAPTED_TOL: f64 = 1e-12;
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// `c[p,q]` multiplies `z^p z̄^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarJet {
    poly: Poly2<Complex64>,
}

impl PlanarJet {
    pub fn zero(degree: usize) -> Result<Self> {
        check_degree(degree)?;
        Ok(Self {
            poly: Poly2::zero(degree),
        })
    }

    pub fn identity(degree: usize) -> Result<Self> {
        check_degree(degree)?;
        Ok(Self {
            poly: Poly2::var_first(degree),
        })
    }

    /// Builds a jet from `((p, q), c)` entries; unlisted monomials are zero.
    pub fn from_terms(degree: usize, terms: &[((usize, usize), Complex64)]) -> Result<Self> {
        let mut jet = Self::zero(degree)?;
        for &((p, q), c) in terms {
            if p + q > degree {
                return Err(Error::NotAdapted(format!("monomial ({p},{q}) above degree {degree}")));
            }
            jet.poly.set(p, q, c);
        }
        Ok(jet)
    }

    pub(crate) fn from_poly(poly: Poly2<Complex64>) -> Self {
        Self { poly }
    }

    pub fn poly(&self) -> &Poly2<Complex64> {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn coeff(&self, p: usize, q: usize) -> Complex64 {
        self.poly.get(p, q)
    }

    pub fn with_coeff(&self, p: usize, q: usize, c: Complex64) -> Self {
        let mut poly = self.poly.clone();
        poly.set(p, q, c);
        Self { poly }
    }

    pub fn nu(&self) -> Complex64 {
        self.coeff(1, 0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.poly.eval(z, z.conj())
    }

    /// The jet of `z ↦ conj(f(z))`: `c[p,q] ↦ conj(c[q,p])`.
    pub fn conj(&self) -> Self {
        let d = self.degree();
        let mut poly = Poly2::zero(d);
        for (p, q) in poly::monomials(d) {
            poly.set(p, q, self.poly.get(q, p).conj());
        }
        Self { poly }
    }

    pub fn max_in_degrees(&self, range: std::ops::RangeInclusive<usize>) -> f64 {
        self.poly.max_in_degrees(range)
    }

    pub fn is_adapted(&self) -> bool {
        self.coeff(0, 0).norm() <= ADAPTED_TOL
            && self.coeff(0, 1).norm() <= ADAPTED_TOL
            && (self.coeff(1, 0).norm() - 1.0).abs() <= ADAPTED_TOL
    }

    pub fn require_adapted(&self) -> Result<()> {
        if self.is_adapted() {
            Ok(())
        } else {
            Err(Error::NotAdapted(format!(
                "c00 = {}, c01 = {}, |c10| = {}",
                self.coeff(0, 0),
                self.coeff(0, 1),
                self.coeff(1, 0).norm()
            )))
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("degree".into(), Value::from(self.degree()));
        for (p, q) in poly::monomials(self.degree()) {
            let c = self.coeff(p, q);
            m.insert(format!("{p},{q}"), Value::from(vec![c.re, c.im]));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Json("expected an object".into()))?;
        let degree = obj
            .get("degree")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("missing integer \"degree\"".into()))? as usize;
        let mut jet = Self::zero(degree)?;
        for (key, val) in obj {
            if key == "degree" {
                continue;
            }
            let (p, q) = parse_key(key)?;
            if p + q > degree {
                return Err(Error::Json(format!("key {key} above degree {degree}")));
            }
            let pair = val
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Json(format!("{key}: expected [re, im]")))?;
            let re = pair[0].as_f64().ok_or_else(|| Error::Json(format!("{key}: re")))?;
            let im = pair[1].as_f64().ok_or_else(|| Error::Json(format!("{key}: im")))?;
            jet.poly.set(p, q, Complex64::new(re, im));
        }
        Ok(jet)
    }
}

fn parse_key(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::Json(format!("bad monomial key {key:?}"));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

impl serde::Serialize for PlanarJet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for PlanarJet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

fn check_degree(degree: usize) -> Result<()> {
    if degree == 3 || degree == 4 {
        Ok(())
    } else {
        Err(Error::UnsupportedDegree(degree))
    }
}

/// `ν = e^{iψ}` with `ψ ∈ (0, π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitMultiplier {
    psi: f64,
    nu: Complex64,
    margin: f64,
}

impl UnitMultiplier {
    pub fn new(psi: f64) -> Result<Self> {
        Self::with_margin(psi, DEFAULT_MARGIN)
    }

    pub fn with_margin(psi: f64, margin: f64) -> Result<Self> {
        if !(psi > 0.0 && psi < PI) {
            return Err(Error::PsiOutOfRange(psi));
        }
        Ok(Self {
            psi,
            nu: Complex64::new(psi.cos(), psi.sin()),
            margin,
        })
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn nu(&self) -> Complex64 {
        self.nu
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// The strong resonance within the margin, if any.
    pub fn resonance(&self) -> Option<&'static str> {
        if (self.psi - PI / 2.0).abs() <= self.margin {
            Some("pi/2")
        } else if (self.psi - 2.0 * PI / 3.0).abs() <= self.margin {
            Some("2pi/3")
        } else {
            None
        }
    }

    pub fn regular(&self) -> bool {
        self.resonance().is_none()
    }

    pub fn require_regular(&self) -> Result<()> {
        match self.resonance() {
            None => Ok(()),
            Some(resonance) => Err(Error::Resonance {
                psi: self.psi,
                resonance,
            }),
        }
    }
}

/// `outer(inner, conj(inner))`, truncated.
pub fn compose(outer: &PlanarJet, inner: &PlanarJet) -> Result<PlanarJet> {
    if outer.degree() != inner.degree() {
        return Err(Error::DegreeMismatch(outer.degree(), inner.degree()));
    }
    let c0 = inner.coeff(0, 0).norm();
    if c0 != 0.0 {
        return Err(Error::NonzeroConstant(c0));
    }
    let conj = inner.conj();
    Ok(PlanarJet::from_poly(outer.poly.substitute(&inner.poly, &conj.poly)))
}

/// Series reversion: `compose(f, invert(f)) = z` up to truncation.
pub fn invert(f: &PlanarJet) -> Result<PlanarJet> {
    let c0 = f.coeff(0, 0).norm();
    if c0 != 0.0 {
        return Err(Error::NonzeroConstant(c0));
    }
    let a = f.coeff(1, 0);
    let b = f.coeff(0, 1);
    let det = a.norm_sqr() - b.norm_sqr();
    if det.abs() <= 1e-14 * (a.norm_sqr() + b.norm_sqr()).max(f64::MIN_POSITIVE) {
        return Err(Error::SingularLinearPart(det));
    }
    let d = f.degree();
    // L⁻¹(w) = (ā w − b w̄) / (|a|² − |b|²)
    let linv = |w: &PlanarJet| -> PlanarJet {
        let wc = w.conj();
        PlanarJet::from_poly(
            w.poly.scale(a.conj() / det) + wc.poly.scale(-b / det),
        )
    };
    let nonlinear = PlanarJet::from_poly(f.poly.map_coeffs(|p, q, v| {
        if p + q >= 2 {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    }));
    let z = PlanarJet::identity(d)?;
    let mut g = linv(&z);
    for _ in 1..d {
        let ng = compose(&nonlinear, &g)?;
        g = linv(&PlanarJet::from_poly(z.poly.clone() - ng.poly));
    }
    Ok(g)
}

/// `tr ∘ map ∘ tr⁻¹`.
pub fn conjugate(map: &PlanarJet, tr: &PlanarJet) -> Result<PlanarJet> {
    let inv = invert(tr)?;
    compose(tr, &compose(map, &inv)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn conj_swaps_and_conjugates() {
        let f = PlanarJet::from_terms(3, &[((2, 1), c(1.0, 2.0))]).unwrap();
        assert_eq!(f.conj().coeff(1, 2), c(1.0, -2.0));
        assert_eq!(f.conj().coeff(2, 1), c(0.0, 0.0));
    }

    #[test]
    fn degree_two_rejected() {
        assert_eq!(PlanarJet::zero(2), Err(Error::UnsupportedDegree(2)));
    }

    #[test]
    fn json_keys() {
        let f = PlanarJet::from_terms(3, &[((1, 0), c(0.5, -0.25))]).unwrap();
        let v = f.to_json();
        assert_eq!(v["degree"], 3);
        assert_eq!(v["1,0"], serde_json::json!([0.5, -0.25]));
        assert_eq!(v.as_object().unwrap().len(), 11);
    }

    #[test]
    fn margin_flags_resonances() {
        assert!(!UnitMultiplier::new(PI / 2.0 + 5e-7).unwrap().regular());
        assert!(UnitMultiplier::new(PI / 2.0 + 2e-6).unwrap().regular());
        assert!(UnitMultiplier::new(0.0).is_err());
    }
}
