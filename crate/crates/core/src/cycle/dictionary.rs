//! The `(μ₁, μ₂) ↔ (M₁, M₂)` dictionary.

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::config::CycleModelConfig;
use super::model::{bracket, check_precision, Precision, ReturnSpec};
use crate::error::{Error, Result};
use crate::henon::HenonParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dictionary {
    /// `M₁ = −D₁₂²G₂₁(μ₁ + C₂₁x₂ⁱⁿλ₂ʲ − y₁ᵒᵘᵗγ₁⁻ⁱ)γ₁²ⁱγ₂²ʲ`,
    /// `M₂ = −B₂₁C₂₁J₁₂(λ₁γ₁)ⁱ(λ₂γ₂)ʲ`.
    #[default]
    Literal,
    /// Parameters of the Hénon map `T_ij` is affinely conjugate to (exact for
    /// `a21 = 0`): the literal `M₁` shifted by the linear and offset terms.
    Conjugate,
}

/// `M₂` for the given `γ₂` scale.
pub fn m2_of(cfg: &CycleModelConfig, i: u32, j: u32, gamma2_scale: f64) -> f64 {
    -cfg.b21
        * cfg.c21
        * cfg.j12()
        * (cfg.lambda1 * cfg.gamma1).powi(i as i32)
        * (cfg.lambda2 * cfg.gamma2 * gamma2_scale).powi(j as i32)
}

/// `−D₁₂²G₂₁γ₁²ⁱγ₂²ʲ`: the factor turning the bracket into `M₁`.
fn m1_factor(cfg: &CycleModelConfig, i: u32, j: u32, gamma2_scale: f64) -> f64 {
    -cfg.d12
        * cfg.d12
        * cfg.g21
        * cfg.gamma1.powi(2 * i as i32)
        * (cfg.gamma2 * gamma2_scale).powi(2 * j as i32)
}

/// `M₁_conjugate − M₁_literal`; independent of `μ₁`.
pub fn conjugacy_shift(cfg: &CycleModelConfig, i: u32, j: u32, gamma2_scale: f64) -> f64 {
    let (i, j) = (i as i32, j as i32);
    let l1 = cfg.lambda1.powi(i);
    let g1 = cfg.gamma1.powi(i);
    let l2 = cfg.lambda2.powi(j);
    let g2 = (cfg.gamma2 * gamma2_scale).powi(j);
    let m2 = m2_of(cfg, i as u32, j as u32, gamma2_scale);
    let beta = cfg.b12 * cfg.c21 * g1 * l2 + cfg.b21 * cfg.c12 * l1 * g2;
    let s = g1 * g2 * cfg.d12 * cfg.g21;
    let offsets = g1 * g2 * l1 * l2 * cfg.c21 * cfg.j12() * cfg.x1in
        + g1 * l2 * cfg.b12 * cfg.c21 * cfg.y2out
        + l1 * g2 * cfg.c12 * cfg.x1in
        - cfg.y2out;
    -s * offsets + beta * beta / 4.0 - beta * (1.0 + m2) / 2.0
}

pub fn rescale_params_with(
    cfg: &CycleModelConfig,
    spec: &ReturnSpec,
    dictionary: Dictionary,
    precision: Precision,
) -> Result<HenonParams> {
    check_precision(cfg, spec.i, spec.j, spec.gamma2_scale, precision)?;
    let b = f64::from(bracket(cfg, spec));
    let m1 = m1_factor(cfg, spec.i, spec.j, spec.gamma2_scale) * b;
    let m2 = m2_of(cfg, spec.i, spec.j, spec.gamma2_scale);
    let m1 = match dictionary {
        Dictionary::Literal => m1,
        Dictionary::Conjugate => m1 + conjugacy_shift(cfg, spec.i, spec.j, spec.gamma2_scale),
    };
    Ok(HenonParams::new(m1, m2))
}

/// Literal dictionary in double precision.
pub fn rescale_params(cfg: &CycleModelConfig, spec: &ReturnSpec) -> Result<HenonParams> {
    rescale_params_with(cfg, spec, Dictionary::Literal, Precision::Double)
}

pub fn params_for_target_with(
    cfg: &CycleModelConfig,
    i: u32,
    j: u32,
    target: HenonParams,
    dictionary: Dictionary,
    precision: Precision,
) -> Result<ReturnSpec> {
    let sign = cfg.orientation(i, j);
    if sign != 1.0 {
        return Err(Error::NegativeOrientation { i, j });
    }
    let (lo, hi) = (sign - 0.5, sign + 0.5);
    if !(target.m1 > -2.0 && target.m1 < 4.0 && target.m2 > lo && target.m2 < hi) {
        return Err(Error::TargetOutsideBox {
            m1: target.m1,
            m2: target.m2,
            lo,
            hi,
        });
    }
    let m2_unit = m2_of(cfg, i, j, 1.0);
    let gamma2_scale = (target.m2 / m2_unit).powf(1.0 / j as f64);
    check_precision(cfg, i, j, gamma2_scale, precision)?;
    let m1_lit = match dictionary {
        Dictionary::Literal => target.m1,
        Dictionary::Conjugate => target.m1 - conjugacy_shift(cfg, i, j, gamma2_scale),
    };
    let b = TwoFloat::from(m1_lit) / TwoFloat::from(m1_factor(cfg, i, j, gamma2_scale));
    let l2j = TwoFloat::from(cfg.lambda2).powi(j as i32);
    let g1mi = TwoFloat::from(cfg.gamma1).powi(-(i as i32));
    let mu = b - TwoFloat::new_mul(cfg.c21, cfg.x2in) * l2j + TwoFloat::from(cfg.y1out) * g1mi;
    let (mu1, mu1_lo) = match precision {
        Precision::Double => (f64::from(mu), 0.0),
        Precision::Extended => (mu.hi(), mu.lo()),
    };
    Ok(ReturnSpec {
        i,
        j,
        mu1,
        mu1_lo,
        gamma2_scale,
    })
}

/// Literal dictionary in double precision.
pub fn params_for_target(cfg: &CycleModelConfig, i: u32, j: u32, target: HenonParams) -> Result<ReturnSpec> {
    params_for_target_with(cfg, i, j, target, Dictionary::Literal, Precision::Double)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// `LHS / RHS` of the domain inequality.
    pub ratio: f64,
}

/// `|μ₁ + C₂₁x₂ⁱⁿλ₂ʲ − y₁ᵒᵘᵗγ₁⁻ⁱ| < K₁(|λ₁ⁱλ₂ʲ| + |γ₁|⁻ⁱ)`.
pub fn admissible(cfg: &CycleModelConfig, spec: &ReturnSpec) -> Admissibility {
    let lhs = f64::from(bracket(cfg, spec)).abs();
    let rhs = cfg.k1
        * ((cfg.lambda1.powi(spec.i as i32) * cfg.lambda2.powi(spec.j as i32)).abs()
            + cfg.gamma1.abs().powi(-(spec.i as i32)));
    let ratio = lhs / rhs;
    Admissibility {
        admissible: ratio < 1.0,
        ratio,
    }
}

/// Pairs `(i, j)` with `|i + μ₂*·j| ≤ 1`, `i = round(−μ₂*·j)`, both above `kappa0`.
pub fn index_sequence(cfg: &CycleModelConfig, js: impl IntoIterator<Item = u32>) -> Vec<(u32, u32)> {
    let mu2 = cfg.mu2(1.0);
    js.into_iter()
        .filter_map(|j| {
            let i = (-mu2 * j as f64).round();
            if i < 1.0 || (i + mu2 * j as f64).abs() > 1.0 {
                return None;
            }
            let i = i as u32;
            (i > cfg.kappa0 && j > cfg.kappa0).then_some((i, j))
        })
        .collect()
}

/// Return period `i·per(O₁) + 1 + j·per(O₂) + 1` with unit periods.
pub fn tau(i: u32, j: u32) -> u32 {
    i + j + 2
}
