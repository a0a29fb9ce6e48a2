use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::config::CycleModelConfig;
use crate::error::{Error, Result};
use crate::jet::{PlanarMap, Poly2};

/// Values the return map can be evaluated on (plain numbers or jets).
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Add<f64, Output = T>
        + Sub<f64, Output = T>
        + Mul<f64, Output = T>
{
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Saddle {
    One,
    Two,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CyclePoint {
    pub x: f64,
    pub y: f64,
    pub u: DVector<f64>,
}

impl CyclePoint {
    pub fn new(x: f64, y: f64, u: DVector<f64>) -> Self {
        Self { x, y, u }
    }
}

/// Offsets `(x₁₀ − x₁ⁱⁿ, y₁ᵢ − y₁ᵒᵘᵗ, u₁₀ − u₁ⁱⁿ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShilnikovPoint {
    pub xi1: f64,
    pub eta1: f64,
    pub upsilon1: DVector<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnSpec {
    pub i: u32,
    pub j: u32,
    pub mu1: f64,
    /// Low word of `μ₁` in extended precision; zero otherwise.
    #[serde(default)]
    pub mu1_lo: f64,
    pub gamma2_scale: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    Double,
    /// Double-double bracket arithmetic.
    Extended,
}

impl Precision {
    pub fn cap(&self) -> f64 {
        match self {
            Precision::Double => 1e15,
            Precision::Extended => 1e30,
        }
    }
}

pub fn local_map(cfg: &CycleModelConfig, which: Saddle, pt: &CyclePoint) -> CyclePoint {
    local_iterate(cfg, which, pt, 1)
}

pub fn local_iterate(cfg: &CycleModelConfig, which: Saddle, pt: &CyclePoint, k: u32) -> CyclePoint {
    let (l, g, a) = match which {
        Saddle::One => (cfg.lambda1, cfg.gamma1, cfg.a1_matrix()),
        Saddle::Two => (cfg.lambda2, cfg.gamma2, cfg.a2_matrix()),
    };
    let mut out = pt.clone();
    for _ in 0..k {
        out = CyclePoint::new(l * out.x, g * out.y, &a * &out.u);
    }
    out
}

/// Cross-form of a `k`-orbit segment: `(x₀, y_k, u₀) ↦ (x_k, y₀, u_k)`.
pub fn ilm_representation(
    cfg: &CycleModelConfig,
    which: Saddle,
    x0: f64,
    yk: f64,
    u0: &DVector<f64>,
    k: u32,
) -> (f64, f64, DVector<f64>) {
    let (l, g, a) = match which {
        Saddle::One => (cfg.lambda1, cfg.gamma1, cfg.a1_matrix()),
        Saddle::Two => (cfg.lambda2, cfg.gamma2, cfg.a2_matrix()),
    };
    let ak = a.pow(k);
    (l.powi(k as i32) * x0, g.powi(-(k as i32)) * yk, ak * u0)
}

pub fn global_12(cfg: &CycleModelConfig, pt: &CyclePoint) -> CyclePoint {
    let dy = pt.y - cfg.y1out;
    CyclePoint::new(
        cfg.x2in + cfg.a12 * pt.x + cfg.b12 * dy,
        cfg.c12 * pt.x + cfg.d12 * dy,
        cfg.vector(&cfg.u2in) + cfg.vector(&cfg.e12) * pt.x + cfg.vector(&cfg.f12) * dy + &pt.u,
    )
}

pub fn global_21(cfg: &CycleModelConfig, mu1: f64, pt: &CyclePoint) -> CyclePoint {
    let dy = pt.y - cfg.y2out;
    CyclePoint::new(
        cfg.x1in + cfg.a21 * pt.x + cfg.b21 * dy,
        mu1 + cfg.c21 * pt.x + cfg.g21 * dy * dy,
        cfg.vector(&cfg.u1in) + cfg.vector(&cfg.e21) * pt.x + cfg.vector(&cfg.f21) * dy + &pt.u,
    )
}

/// `μ₁ + C₂₁x₂ⁱⁿλ₂ʲ − y₁ᵒᵘᵗγ₁⁻ⁱ` in double-double.
pub fn bracket(cfg: &CycleModelConfig, spec: &ReturnSpec) -> TwoFloat {
    let mu = TwoFloat::new_add(spec.mu1, spec.mu1_lo);
    let l2j = TwoFloat::from(cfg.lambda2).powi(spec.j as i32);
    let g1mi = TwoFloat::from(cfg.gamma1).powi(-(spec.i as i32));
    let cx = TwoFloat::new_mul(cfg.c21, cfg.x2in);
    mu + cx * l2j - TwoFloat::from(cfg.y1out) * g1mi
}

/// `|γ₁²ⁱ γ₂²ʲ|` with the scaled `γ₂`.
pub fn precision_scale(cfg: &CycleModelConfig, i: u32, j: u32, gamma2_scale: f64) -> f64 {
    (cfg.gamma1.powi(2 * i as i32) * (cfg.gamma2 * gamma2_scale).powi(2 * j as i32)).abs()
}

pub fn check_precision(cfg: &CycleModelConfig, i: u32, j: u32, gamma2_scale: f64, precision: Precision) -> Result<()> {
    let scale = precision_scale(cfg, i, j, gamma2_scale);
    if scale > precision.cap() || !scale.is_finite() {
        return Err(Error::PrecisionCap {
            scale,
            cap: precision.cap(),
        });
    }
    Ok(())
}

/// A first-return map `T_ij` with all powers precomputed.
#[derive(Clone, Debug)]
pub struct ReturnMap {
    cfg: CycleModelConfig,
    spec: ReturnSpec,
    pub l1i: f64,
    pub g1i: f64,
    pub l2j: f64,
    pub g2j: f64,
    a1i: DMatrix<f64>,
    a2j: DMatrix<f64>,
    a1: DMatrix<f64>,
    a2: DMatrix<f64>,
    /// `μ₁ + C₂₁x₂ⁱⁿλ₂ʲ − y₁ᵒᵘᵗγ₁⁻ⁱ`.
    pub bracket: f64,
    /// Chart scales: `ξ = kx·X`, `η = ky·Y`.
    pub kx: f64,
    pub ky: f64,
    u1in: DVector<f64>,
    u2in: DVector<f64>,
    e12: DVector<f64>,
    f12: DVector<f64>,
    e21: DVector<f64>,
    f21: DVector<f64>,
}

struct Legs {
    dx2: f64,
    x2j: f64,
    e: f64,
    u2j: DVector<f64>,
}

fn box_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

impl ReturnMap {
    pub fn new(cfg: &CycleModelConfig, spec: &ReturnSpec, precision: Precision) -> Result<Self> {
        if spec.i <= cfg.kappa0 || spec.j <= cfg.kappa0 {
            return Err(Error::BelowKappa {
                i: spec.i,
                j: spec.j,
                kappa0: cfg.kappa0,
            });
        }
        check_precision(cfg, spec.i, spec.j, spec.gamma2_scale, precision)?;
        let (i, j) = (spec.i as i32, spec.j as i32);
        let g2 = cfg.gamma2 * spec.gamma2_scale;
        let g1i = cfg.gamma1.powi(i);
        let g2j = g2.powi(j);
        let a1 = cfg.a1_matrix();
        let a2 = cfg.a2_matrix();
        Ok(Self {
            l1i: cfg.lambda1.powi(i),
            g1i,
            l2j: cfg.lambda2.powi(j),
            g2j,
            a1i: a1.pow(spec.i),
            a2j: a2.pow(spec.j),
            a1,
            a2,
            bracket: f64::from(bracket(cfg, spec)),
            kx: -cfg.b21 / (cfg.g21 * cfg.d12) / (g1i * g2j),
            ky: -1.0 / (cfg.g21 * cfg.d12 * cfg.d12) / (g1i * g2j * g2j),
            u1in: cfg.vector(&cfg.u1in),
            u2in: cfg.vector(&cfg.u2in),
            e12: cfg.vector(&cfg.e12),
            f12: cfg.vector(&cfg.f12),
            e21: cfg.vector(&cfg.e21),
            f21: cfg.vector(&cfg.f21),
            cfg: cfg.clone(),
            spec: *spec,
        })
    }

    pub fn config(&self) -> &CycleModelConfig {
        &self.cfg
    }

    pub fn spec(&self) -> &ReturnSpec {
        &self.spec
    }

    pub fn ss_dim(&self) -> usize {
        self.cfg.ss_dim
    }

    pub fn zero_u(&self) -> DVector<f64> {
        DVector::zeros(self.cfg.ss_dim)
    }

    fn legs(&self, p: &ShilnikovPoint, check: bool) -> Result<Legs> {
        let c = &self.cfg;
        let d = c.delta_dom;
        let fail = |leg, iterate, what| Err(Error::Itinerary { leg, iterate, what });
        let x0 = c.x1in + p.xi1;
        let y0 = (c.y1out + p.eta1) / self.g1i;
        let u0 = &self.u1in + &p.upsilon1;
        if check && !((p.xi1).abs() <= d && y0.abs() <= d && box_norm(&p.upsilon1) <= d) {
            return fail(0, 0, "start outside the entry box around (x1in, 0, u1in)");
        }
        let x1i = self.l1i * x0;
        let u1i = &self.a1i * &u0;
        if check {
            let (bx, by, bu) = (c.x1in.abs() + d, c.y1out.abs() + d, box_norm(&self.u1in) + d);
            let mut u = u0.clone();
            for m in 1..self.spec.i {
                u = &self.a1 * u;
                let xm = c.lambda1.powi(m as i32) * x0;
                let ym = c.gamma1.powi(m as i32) * y0;
                if !(xm.abs() <= bx && ym.abs() <= by && box_norm(&u) <= bu) {
                    return fail(1, m as usize, "left the neighbourhood of saddle 1");
                }
            }
            if !(x1i.abs() <= d && p.eta1.abs() <= d && box_norm(&u1i) <= d) {
                return fail(1, self.spec.i as usize, "missed the exit box around (0, y1out, 0)");
            }
        }
        let dx2 = c.a12 * x1i + c.b12 * p.eta1;
        let yb2 = c.c12 * x1i + c.d12 * p.eta1;
        let ub2 = &self.u2in + &self.e12 * x1i + &self.f12 * p.eta1 + &u1i;
        if check && !(dx2.abs() <= d && yb2.abs() <= d && box_norm(&(&ub2 - &self.u2in)) <= d) {
            return fail(2, 0, "transition 1->2 missed the entry box around (x2in, 0, u2in)");
        }
        let xb2 = c.x2in + dx2;
        let x2j = self.l2j * xb2;
        let y2j = self.g2j * yb2;
        let e = y2j - c.y2out;
        let u2j = &self.a2j * &ub2;
        if check {
            let (bx, by, bu) = (c.x2in.abs() + d, c.y2out.abs() + d, box_norm(&self.u2in) + d);
            let mut u = ub2.clone();
            for m in 1..self.spec.j {
                u = &self.a2 * u;
                let xm = c.lambda2.powi(m as i32) * xb2;
                let ym = (c.gamma2 * self.spec.gamma2_scale).powi(m as i32) * yb2;
                if !(xm.abs() <= bx && ym.abs() <= by && box_norm(&u) <= bu) {
                    return fail(3, m as usize, "left the neighbourhood of saddle 2");
                }
            }
            if !(x2j.abs() <= d && e.abs() <= d && box_norm(&u2j) <= d) {
                return fail(3, self.spec.j as usize, "missed the exit box around (0, y2out, 0)");
            }
        }
        Ok(Legs { dx2, x2j, e, u2j })
    }

    fn finish(&self, l: &Legs) -> ShilnikovPoint {
        let c = &self.cfg;
        let xi = c.a21 * l.x2j + c.b21 * l.e;
        let eta = self.g1i * (self.bracket + c.c21 * self.l2j * l.dx2 + c.g21 * l.e * l.e);
        let ups = &self.e21 * l.x2j + &self.f21 * l.e + &l.u2j;
        ShilnikovPoint {
            xi1: xi,
            eta1: eta,
            upsilon1: ups,
        }
    }

    /// One return in Shilnikov coordinates, with the itinerary enforced.
    pub fn step(&self, p: &ShilnikovPoint) -> Result<ShilnikovPoint> {
        let legs = self.legs(p, true)?;
        Ok(self.finish(&legs))
    }

    /// One return without itinerary checks.
    pub fn step_unchecked(&self, p: &ShilnikovPoint) -> ShilnikovPoint {
        let legs = self.legs(p, false).expect("unchecked legs cannot fail");
        self.finish(&legs)
    }

    pub fn to_shilnikov(&self, pt: &CyclePoint) -> ShilnikovPoint {
        ShilnikovPoint {
            xi1: pt.x - self.cfg.x1in,
            eta1: self.g1i * pt.y - self.cfg.y1out,
            upsilon1: &pt.u - &self.u1in,
        }
    }

    pub fn from_shilnikov(&self, p: &ShilnikovPoint) -> CyclePoint {
        CyclePoint::new(
            self.cfg.x1in + p.xi1,
            (self.cfg.y1out + p.eta1) / self.g1i,
            &self.u1in + &p.upsilon1,
        )
    }

    pub fn to_chart(&self, p: &ShilnikovPoint) -> [f64; 2] {
        [p.xi1 / self.kx, p.eta1 / self.ky]
    }

    pub fn from_chart(&self, xy: [f64; 2], upsilon: DVector<f64>) -> ShilnikovPoint {
        ShilnikovPoint {
            xi1: xy[0] * self.kx,
            eta1: xy[1] * self.ky,
            upsilon1: upsilon,
        }
    }

    /// The `(x, y)` part of the return in chart coordinates; it does not
    /// depend on the strong-stable coordinates.
    pub fn chart<S: Scalar>(&self, x: S, y: S) -> (S, S) {
        let c = &self.cfg;
        let xi = x * self.kx;
        let eta = y * self.ky;
        let x1i = (xi + c.x1in) * self.l1i;
        let dx2 = x1i.clone() * c.a12 + eta.clone() * c.b12;
        let yb2 = x1i * c.c12 + eta * c.d12;
        let x2j = (dx2.clone() + c.x2in) * self.l2j;
        let e = yb2 * self.g2j - c.y2out;
        let xi_n = x2j * c.a21 + e.clone() * c.b21;
        let eta_n = (dx2 * (c.c21 * self.l2j) + e.clone() * e * c.g21 + self.bracket) * self.g1i;
        (xi_n * (1.0 / self.kx), eta_n * (1.0 / self.ky))
    }

    /// Jacobian in Shilnikov coordinates `(ξ, η, υ)`.
    pub fn jacobian(&self, p: &ShilnikovPoint) -> DMatrix<f64> {
        let c = &self.cfg;
        let n = 2 + c.ss_dim;
        let legs = self.legs(p, false).expect("unchecked legs cannot fail");
        let mut dx1i = DVector::zeros(n);
        dx1i[0] = self.l1i;
        let mut deta = DVector::zeros(n);
        deta[1] = 1.0;
        let ddx2 = &dx1i * c.a12 + &deta * c.b12;
        let dyb2 = &dx1i * c.c12 + &deta * c.d12;
        let dx2j = &ddx2 * self.l2j;
        let de = &dyb2 * self.g2j;
        let mut jac = DMatrix::zeros(n, n);
        jac.set_row(0, &(&dx2j * c.a21 + &de * c.b21).transpose());
        let deta_n = (&dx2j * c.c21 + &de * (2.0 * c.g21 * legs.e)) * self.g1i;
        jac.set_row(1, &deta_n.transpose());
        // υ' = e21 x2j + f21 E + A2ʲ(u2in + e12 x1i + f12 η + A1ⁱ(u1in + υ))
        let a2j = &self.a2j;
        let m = a2j * &self.a1i;
        for r in 0..c.ss_dim {
            for k in 0..2 {
                let via = (a2j.row(r) * (&self.e12 * dx1i[k] + &self.f12 * deta[k]))[0];
                jac[(2 + r, k)] = self.e21[r] * dx2j[k] + self.f21[r] * de[k] + via;
            }
            for k in 0..c.ss_dim {
                jac[(2 + r, 2 + k)] = m[(r, k)];
            }
        }
        jac
    }

    /// Fixed point of the affine strong-stable part for a given planar point.
    pub fn upsilon_fixed(&self, p: &ShilnikovPoint) -> Result<DVector<f64>> {
        let zero = ShilnikovPoint {
            xi1: p.xi1,
            eta1: p.eta1,
            upsilon1: self.zero_u(),
        };
        let offset = self.step_unchecked(&zero).upsilon1;
        let m = &self.a2j * &self.a1i;
        let lhs = DMatrix::identity(self.cfg.ss_dim, self.cfg.ss_dim) - m;
        lhs.lu()
            .solve(&offset)
            .ok_or_else(|| Error::NewtonFailed("strong-stable block not invertible".into()))
    }
}

/// Raw-coordinate `T_ij = T₂→₁ ∘ T₂ʲ ∘ T₁→₂ ∘ T₁ⁱ` with the itinerary enforced.
pub fn first_return(cfg: &CycleModelConfig, spec: &ReturnSpec, pt: &CyclePoint, precision: Precision) -> Result<CyclePoint> {
    let map = ReturnMap::new(cfg, spec, precision)?;
    let out = map.step(&map.to_shilnikov(pt))?;
    Ok(map.from_shilnikov(&out))
}

/// Planar restriction of a return map in chart coordinates.
pub struct ChartMap<'a> {
    pub map: &'a ReturnMap,
    /// Enforce the itinerary (with `υ = 0`) on every evaluation.
    pub check_itinerary: bool,
}

impl PlanarMap for ChartMap<'_> {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        if self.check_itinerary {
            let sp = self.map.from_chart(p, self.map.zero_u());
            self.map.legs(&sp, true)?;
        }
        let (x, y) = self.map.chart(p[0], p[1]);
        Ok([x, y])
    }

    fn polynomial_expansion(&self, at: [f64; 2], degree: usize) -> Option<[Poly2<f64>; 2]> {
        let x = Poly2::var_first(degree) + at[0];
        let y = Poly2::var_second(degree) + at[1];
        let (fx, fy) = self.map.chart(x, y);
        Some([fx, fy])
    }
}
