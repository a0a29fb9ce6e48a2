use num_complex::Complex64;

use super::poly::{monomials, Poly2};
use super::PlanarJet;
use crate::error::{Error, Result};

pub const ORIGIN_TOL: f64 = 1e-10;
pub const ON_CIRCLE_TOL: f64 = 1e-8;

/// Real jet of a planar map at a fixed point moved to the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPlanarJet {
    components: [Poly2<f64>; 2],
}

impl RealPlanarJet {
    pub fn new(first: Poly2<f64>, second: Poly2<f64>) -> Result<Self> {
        if first.degree() != second.degree() {
            return Err(Error::DegreeMismatch(first.degree(), second.degree()));
        }
        let c = first.get(0, 0).abs().max(second.get(0, 0).abs());
        if c > ORIGIN_TOL {
            return Err(Error::NonzeroConstant(c));
        }
        Ok(Self {
            components: [first, second],
        })
    }

    pub fn degree(&self) -> usize {
        self.components[0].degree()
    }

    pub fn component(&self, k: usize) -> &Poly2<f64> {
        &self.components[k]
    }

    /// Coefficient of `X^a Y^b` in component `k`.
    pub fn coeff(&self, k: usize, a: usize, b: usize) -> f64 {
        self.components[k].get(a, b)
    }

    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        let [f, g] = &self.components;
        [[f.get(1, 0), f.get(0, 1)], [g.get(1, 0), g.get(0, 1)]]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = self.degree().min(other.degree());
        (0..2)
            .flat_map(|k| monomials(d).map(move |(a, b)| (k, a, b)))
            .map(|(k, a, b)| (self.coeff(k, a, b) - other.coeff(k, a, b)).abs())
            .fold(0.0, f64::max)
    }
}

/// Normalization of the eigenvector that spans the adapted coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AdaptBasis {
    /// Unit Euclidean norm, first component real positive.
    #[default]
    UnitNorm,
    /// First component equal to 1 (for Hénon this gives `X = U`, `Y = cU − sV`).
    FirstComponentOne,
}

/// Complex coordinate `z = U + iV` in which the linear part is `z ↦ νz`.
pub fn complex_adapt(rj: &RealPlanarJet, basis: AdaptBasis) -> Result<PlanarJet> {
    let d = rj.degree();
    if d != 3 && d != 4 {
        return Err(Error::UnsupportedDegree(d));
    }
    let j = rj.jacobian();
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = det - tr * tr / 4.0;
    if disc <= 0.0 {
        return Err(Error::NotElliptic(format!("real eigenvalues (trace {tr}, det {det})")));
    }
    let nu = Complex64::new(tr / 2.0, disc.sqrt());
    if (nu.norm() - 1.0).abs() > ON_CIRCLE_TOL {
        return Err(Error::NotElliptic(format!("|nu| = {} off the unit circle", nu.norm())));
    }

    let mut v = if j[0][1].abs() >= j[1][0].abs() {
        [Complex64::new(j[0][1], 0.0), nu - j[0][0]]
    } else {
        [nu - j[1][1], Complex64::new(j[1][0], 0.0)]
    };
    match basis {
        AdaptBasis::UnitNorm => {
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            let phase = v[0].conj() / v[0].norm();
            v = [v[0] * phase / n, v[1] * phase / n];
        }
        AdaptBasis::FirstComponentOne => {
            let v0 = v[0];
            v = [Complex64::new(1.0, 0.0), v[1] / v0];
        }
    }
    // (X, Y) = P (U, V) with P = [Re v, −Im v].
    let p = [[v[0].re, -v[0].im], [v[1].re, -v[1].im]];
    let pdet = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    if pdet.abs() < 1e-14 {
        return Err(Error::NotElliptic("degenerate eigenbasis".into()));
    }

    let half = Complex64::new(0.5, 0.0);
    let mut u = Poly2::<Complex64>::zero(d);
    u.set(1, 0, half);
    u.set(0, 1, half);
    let mut w = Poly2::<Complex64>::zero(d);
    w.set(1, 0, Complex64::new(0.0, -0.5));
    w.set(0, 1, Complex64::new(0.0, 0.5));
    let x = u.scale(p[0][0].into()) + w.scale(p[0][1].into());
    let y = u.scale(p[1][0].into()) + w.scale(p[1][1].into());

    let lift = |f: &Poly2<f64>| -> Poly2<Complex64> {
        let mut out = Poly2::zero(d);
        for (a, b) in monomials(d) {
            out.set(a, b, f.get(a, b).into());
        }
        out
    };
    let f1 = lift(rj.component(0)).substitute(&x, &y);
    let f2 = lift(rj.component(1)).substitute(&x, &y);
    // (Ũ, Ṽ) = P⁻¹ (F1, F2), z̃ = Ũ + iṼ
    let ut = f1.scale((p[1][1] / pdet).into()) + f2.scale((-p[0][1] / pdet).into());
    let vt = f1.scale((-p[1][0] / pdet).into()) + f2.scale((p[0][0] / pdet).into());
    let zt = ut + vt.scale(Complex64::i());

    let resid = (zt.get(1, 0) - nu).norm().max(zt.get(0, 1).norm());
    if resid > 1e-9 * (1.0 + nu.norm()) {
        return Err(Error::NotElliptic(format!("adapted linear part residual {resid:e}")));
    }
    let mut zt = zt;
    zt.set(0, 0, Complex64::new(0.0, 0.0));
    zt.set(1, 0, nu / nu.norm());
    zt.set(0, 1, Complex64::new(0.0, 0.0));
    Ok(PlanarJet::from_poly(zt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_adapts_to_nu() {
        let psi: f64 = 0.7;
        let mut f = Poly2::zero(3);
        f.set(1, 0, psi.cos());
        f.set(0, 1, -psi.sin());
        let mut g = Poly2::zero(3);
        g.set(1, 0, psi.sin());
        g.set(0, 1, psi.cos());
        let rj = RealPlanarJet::new(f, g).unwrap();
        let jet = complex_adapt(&rj, AdaptBasis::UnitNorm).unwrap();
        assert!((jet.nu() - Complex64::new(psi.cos(), psi.sin())).norm() < 1e-15);
        assert!(jet.max_in_degrees(2..=3) < 1e-15);
    }

    #[test]
    fn constant_term_rejected() {
        let mut f = Poly2::zero(3);
        f.set(0, 0, 1e-3);
        assert!(RealPlanarJet::new(f, Poly2::zero(3)).is_err());
    }
}
