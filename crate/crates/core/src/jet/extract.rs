use super::poly::Poly2;
use super::real::RealPlanarJet;
use crate::error::{Error, Result};

pub const FIXED_POINT_TOL: f64 = 1e-9;

/// A planar map that can be evaluated pointwise.
pub trait PlanarMap {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]>;

    /// Expansion of `p ↦ apply(at + p)` for polynomial maps, including constants.
    fn polynomial_expansion(&self, _at: [f64; 2], _degree: usize) -> Option<[Poly2<f64>; 2]> {
        None
    }
}

pub trait InvertibleMap: PlanarMap {
    fn apply_inverse(&self, p: [f64; 2]) -> Result<[f64; 2]>;
}

impl<M: PlanarMap + ?Sized> PlanarMap for &M {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        (**self).apply(p)
    }
    fn polynomial_expansion(&self, at: [f64; 2], degree: usize) -> Option<[Poly2<f64>; 2]> {
        (**self).polynomial_expansion(at, degree)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiffScheme {
    /// Exact expansion if the map provides one, finite differences otherwise.
    Auto,
    Exact,
    /// Central differences with two-level Richardson extrapolation. The step
    /// for a derivative of total order `k` is `base_step^(1/k) · max(1, |x|)`.
    FiniteDifference { base_step: f64 },
}

impl Default for DiffScheme {
    fn default() -> Self {
        DiffScheme::Auto
    }
}

pub const DEFAULT_BASE_STEP: f64 = 1e-4;

/// Degree-3 jet of `map` at `fixed_point`, translated to the origin.
pub fn extract_real_jet<M: PlanarMap + ?Sized>(
    map: &M,
    fixed_point: [f64; 2],
    scheme: DiffScheme,
) -> Result<RealPlanarJet> {
    const DEGREE: usize = 3;
    let image = map.apply(fixed_point)?;
    let resid = (image[0] - fixed_point[0]).abs().max((image[1] - fixed_point[1]).abs());
    if !(resid <= FIXED_POINT_TOL) {
        return Err(Error::FixedPointResidual(resid));
    }
    let exact = || -> Result<RealPlanarJet> {
        let [mut f, mut g] = map
            .polynomial_expansion(fixed_point, DEGREE)
            .ok_or(Error::NotPolynomial)?;
        f.set(0, 0, 0.0);
        g.set(0, 0, 0.0);
        RealPlanarJet::new(f, g)
    };
    match scheme {
        DiffScheme::Exact => exact(),
        DiffScheme::Auto => match exact() {
            Err(Error::NotPolynomial) => finite_difference(map, fixed_point, DEFAULT_BASE_STEP),
            other => other,
        },
        DiffScheme::FiniteDifference { base_step } => finite_difference(map, fixed_point, base_step),
    }
}

fn stencil(order: usize) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => unreachable!("derivative order above 3"),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

fn finite_difference<M: PlanarMap + ?Sized>(
    map: &M,
    at: [f64; 2],
    base_step: f64,
) -> Result<RealPlanarJet> {
    const DEGREE: usize = 3;
    if !(base_step > 0.0) {
        return Err(Error::StepUnderflow(base_step));
    }
    let scale = [at[0].abs().max(1.0), at[1].abs().max(1.0)];
    let mut f = Poly2::zero(DEGREE);
    let mut g = Poly2::zero(DEGREE);
    for (a, b) in super::poly::monomials(DEGREE).filter(|&(a, b)| a + b >= 1) {
        let k = (a + b) as f64;
        let h0 = base_step.powf(1.0 / k);
        let hx = h0 * scale[0];
        let hy = h0 * scale[1];
        if at[0] + hx / 2.0 == at[0] || at[1] + hy / 2.0 == at[1] {
            return Err(Error::StepUnderflow(h0));
        }
        let coarse = mixed_derivative(map, at, a, b, hx, hy)?;
        let fine = mixed_derivative(map, at, a, b, hx / 2.0, hy / 2.0)?;
        let norm = factorial(a) * factorial(b);
        f.set(a, b, (4.0 * fine[0] - coarse[0]) / 3.0 / norm);
        g.set(a, b, (4.0 * fine[1] - coarse[1]) / 3.0 / norm);
    }
    RealPlanarJet::new(f, g)
}

fn mixed_derivative<M: PlanarMap + ?Sized>(
    map: &M,
    at: [f64; 2],
    a: usize,
    b: usize,
    hx: f64,
    hy: f64,
) -> Result<[f64; 2]> {
    let mut acc = [0.0; 2];
    for &(i, wi) in stencil(a) {
        for &(j, wj) in stencil(b) {
            let v = map.apply([at[0] + i as f64 * hx, at[1] + j as f64 * hy])?;
            let w = wi * wj;
            acc[0] += w * v[0];
            acc[1] += w * v[1];
        }
    }
    let denom = hx.powi(a as i32) * hy.powi(b as i32);
    Ok([acc[0] / denom, acc[1] / denom])
}
