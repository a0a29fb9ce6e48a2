//! Orbit-based detection of invariant circles.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::henon::{self, HenonParams};
use crate::jet::{InvertibleMap, PlanarMap};

pub const CONVERGENCE_TOL: f64 = 1e-10;
const PERTURBATION_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CircleFound,
    FixedPointAttracting,
    Escaped,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::CircleFound => "circle_found",
            Verdict::FixedPointAttracting => "fixed_point_attracting",
            Verdict::Escaped => "escaped",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Time direction in which the reported object attracts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CircleReport {
    pub verdict: Verdict,
    pub stability: Stability,
    pub center: [f64; 2],
    pub mean_radius: f64,
    pub thickness_ratio: f64,
    pub rotation_number: f64,
    /// Per-iterate decay of a radial perturbation (in the detection direction).
    pub contraction_rate: f64,
    pub iterations_used: usize,
}

impl CircleReport {
    fn bare(verdict: Verdict, center: [f64; 2], iterations_used: usize) -> Self {
        Self {
            verdict,
            stability: Stability::Attracting,
            center,
            mean_radius: 0.0,
            thickness_ratio: f64::NAN,
            rotation_number: f64::NAN,
            contraction_rate: f64::NAN,
            iterations_used,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectOptions {
    pub burn_in: usize,
    pub samples: usize,
    pub escape_radius: f64,
    pub thickness: f64,
    pub bins: usize,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            burn_in: 5000,
            samples: 20000,
            escape_radius: 1e3,
            thickness: 0.05,
            bins: 360,
        }
    }
}

enum Step {
    Ok([f64; 2]),
    Escaped,
    Converged([f64; 2]),
}

fn step<M: PlanarMap + ?Sized>(map: &M, p: [f64; 2], escape: f64) -> Step {
    match map.apply(p) {
        Err(_) => Step::Escaped,
        Ok(q) => {
            let n = q[0].hypot(q[1]);
            if !n.is_finite() || n > escape {
                Step::Escaped
            } else if (q[0] - p[0]).hypot(q[1] - p[1]) < CONVERGENCE_TOL {
                Step::Converged(q)
            } else {
                Step::Ok(q)
            }
        }
    }
}

struct Profile {
    center: [f64; 2],
    mean_radius: f64,
    bins: Vec<Option<(f64, f64, f64, usize)>>,
}

impl Profile {
    fn new(points: &[[f64; 2]], nbins: usize) -> Self {
        let n = points.len() as f64;
        let center = [
            points.iter().map(|p| p[0]).sum::<f64>() / n,
            points.iter().map(|p| p[1]).sum::<f64>() / n,
        ];
        let mut bins: Vec<Option<(f64, f64, f64, usize)>> = vec![None; nbins];
        let mut total = 0.0;
        for p in points {
            let (r, th) = polar(center, *p);
            total += r;
            let b = bin_of(th, nbins);
            bins[b] = Some(match bins[b] {
                None => (r, r, r, 1),
                Some((lo, hi, s, k)) => (lo.min(r), hi.max(r), s + r, k + 1),
            });
        }
        Self {
            center,
            mean_radius: total / n,
            bins,
        }
    }

    fn coverage(&self) -> f64 {
        self.bins.iter().filter(|b| b.is_some()).count() as f64 / self.bins.len() as f64
    }

    fn thickness(&self) -> f64 {
        let spread = self
            .bins
            .iter()
            .flatten()
            .map(|&(lo, hi, _, _)| hi - lo)
            .fold(0.0, f64::max);
        spread / self.mean_radius
    }

    fn radius_at(&self, theta: f64) -> Option<f64> {
        self.bins[bin_of(theta, self.bins.len())].map(|(_, _, s, k)| s / k as f64)
    }
}

fn polar(c: [f64; 2], p: [f64; 2]) -> (f64, f64) {
    let dx = p[0] - c[0];
    let dy = p[1] - c[1];
    (dx.hypot(dy), dy.atan2(dx))
}

fn bin_of(theta: f64, nbins: usize) -> usize {
    let t = (theta + PI) / (2.0 * PI);
    ((t * nbins as f64) as usize).min(nbins - 1)
}

fn wrap(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

pub fn detect<M: PlanarMap + ?Sized>(map: &M, seed: [f64; 2], opts: &DetectOptions) -> CircleReport {
    let mut p = seed;
    let mut used = 0;
    for _ in 0..opts.burn_in {
        used += 1;
        match step(map, p, opts.escape_radius) {
            Step::Ok(q) => p = q,
            Step::Escaped => return CircleReport::bare(Verdict::Escaped, p, used),
            Step::Converged(q) => return CircleReport::bare(Verdict::FixedPointAttracting, q, used),
        }
    }
    let mut points = Vec::with_capacity(2 * opts.samples + 1);
    points.push(p);
    let run = |points: &mut Vec<[f64; 2]>, count: usize, used: &mut usize| -> Option<CircleReport> {
        let mut p = *points.last().unwrap();
        for _ in 0..count {
            *used += 1;
            match step(map, p, opts.escape_radius) {
                Step::Ok(q) => {
                    p = q;
                    points.push(q);
                }
                Step::Escaped => return Some(CircleReport::bare(Verdict::Escaped, p, *used)),
                Step::Converged(q) => {
                    return Some(CircleReport::bare(Verdict::FixedPointAttracting, q, *used))
                }
            }
        }
        None
    };
    if let Some(r) = run(&mut points, opts.samples, &mut used) {
        return r;
    }
    let mut profile = Profile::new(&points, opts.bins);
    let mut needed = 1.0;
    if profile.coverage() < 1.0 {
        if let Some(r) = run(&mut points, opts.samples, &mut used) {
            return r;
        }
        profile = Profile::new(&points, opts.bins);
        needed = 0.9;
    }

    let rotation = {
        let mut acc = 0.0;
        let mut prev = polar(profile.center, points[0]).1;
        for q in &points[1..] {
            let th = polar(profile.center, *q).1;
            acc += wrap(th - prev);
            prev = th;
        }
        (acc / (points.len() - 1) as f64 / (2.0 * PI)).rem_euclid(1.0)
    };
    let thickness = profile.thickness();
    let found = profile.coverage() >= needed
        && thickness <= opts.thickness
        && profile.mean_radius > 10.0 * CONVERGENCE_TOL;
    let contraction_rate = if found {
        perturbation_rate(map, &profile, *points.last().unwrap(), opts.escape_radius)
    } else {
        f64::NAN
    };
    CircleReport {
        verdict: if found {
            Verdict::CircleFound
        } else {
            Verdict::Inconclusive
        },
        stability: Stability::Attracting,
        center: profile.center,
        mean_radius: profile.mean_radius,
        thickness_ratio: thickness,
        rotation_number: rotation,
        contraction_rate,
        iterations_used: used,
    }
}

/// Pushes a circle point outward and fits the decay of its radial deviation.
fn perturbation_rate<M: PlanarMap + ?Sized>(map: &M, profile: &Profile, on: [f64; 2], escape: f64) -> f64 {
    let (r, th) = polar(profile.center, on);
    let eps = 1e-3 * profile.mean_radius;
    let mut q = [
        profile.center[0] + (r + eps) * th.cos(),
        profile.center[1] + (r + eps) * th.sin(),
    ];
    let floor = profile.thickness() * profile.mean_radius + 1e-12;
    let mut logs = Vec::new();
    for k in 0..=PERTURBATION_STEPS {
        let (rq, tq) = polar(profile.center, q);
        let Some(rp) = profile.radius_at(tq) else { break };
        let dev = (rq - rp).abs();
        if k > 0 && dev < 3.0 * floor {
            break;
        }
        logs.push((k as f64, dev.max(f64::MIN_POSITIVE).ln()));
        match step(map, q, escape) {
            Step::Ok(n) | Step::Converged(n) => q = n,
            Step::Escaped => break,
        }
    }
    if logs.len() < 2 {
        return f64::NAN;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

struct Reversed<'a, M: ?Sized>(&'a M);

impl<M: InvertibleMap + ?Sized> PlanarMap for Reversed<'_, M> {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        self.0.apply_inverse(p)
    }
}

/// Runs [`detect`] in reverse time; circles found are repelling.
pub fn detect_repelling<M: InvertibleMap + ?Sized>(map: &M, seed: [f64; 2], opts: &DetectOptions) -> CircleReport {
    let mut report = detect(&Reversed(map), seed, opts);
    report.stability = Stability::Repelling;
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSide {
    Forward,
    Reverse,
    /// Forward when `𝓛 < 0`, reverse when `𝓛 > 0`.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub report: CircleReport,
    pub expected_circle: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsSweep {
    pub m1_star: f64,
    pub lc_sign: f64,
    pub rows: Vec<SweepRow>,
    /// Every row's circle/no-circle outcome matches the sign of `𝓛`.
    pub sidedness_ok: bool,
}

pub const SWEEP_MARGIN: f64 = 0.05;

pub fn ns_sweep(m1_star: f64, deltas: &[f64], side: SweepSide, opts: &DetectOptions) -> Result<NsSweep> {
    if !(m1_star > -1.0 && m1_star < 3.0) {
        return Err(Error::Margin {
            name: "m1",
            value: m1_star,
            rule: "-1 < m1 < 3",
        });
    }
    if (m1_star - 1.25).abs() < SWEEP_MARGIN || m1_star.abs() < SWEEP_MARGIN {
        return Err(Error::Margin {
            name: "m1",
            value: m1_star,
            rule: "distance >= 0.05 from the resonant points 0 and 5/4",
        });
    }
    let lc = henon::lc_closed_form(henon::psi_from_m1(m1_star)?)?;
    let reverse = match side {
        SweepSide::Forward => false,
        SweepSide::Reverse => true,
        SweepSide::Auto => lc > 0.0,
    };
    let rows = deltas
        .par_iter()
        .map(|&delta| -> Result<SweepRow> {
            let p = HenonParams::new(m1_star, 1.0 + delta);
            let fp = henon::fixed_points(&p)?;
            let seed = [fp.plus.location[0] + 1e-3, fp.plus.location[1]];
            let report = if reverse {
                detect_repelling(&p, seed, opts)
            } else {
                detect(&p, seed, opts)
            };
            let expected_circle = if reverse {
                lc > 0.0 && delta < 0.0
            } else {
                lc < 0.0 && delta > 0.0
            };
            Ok(SweepRow {
                delta,
                report,
                expected_circle,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sidedness_ok = rows
        .iter()
        .all(|r| (r.report.verdict == Verdict::CircleFound) == r.expected_circle);
    Ok(NsSweep {
        m1_star,
        lc_sign: lc.signum(),
        rows,
        sidedness_ok,
    })
}

/// `r̃ = r + s·r(μ − r²)`, `θ̃ = θ + ω`: an invariant circle at `r = √μ` for
/// `μ > 0`, attracting for `s = 1` and repelling for `s = −1` (small `μ`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialFixture {
    pub mu: f64,
    pub omega: f64,
    pub sign: f64,
}

impl RadialFixture {
    fn radial(&self, r: f64) -> f64 {
        r + self.sign * r * (self.mu - r * r)
    }
}

impl PlanarMap for RadialFixture {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let r = p[0].hypot(p[1]);
        let th = p[1].atan2(p[0]) + self.omega;
        let rn = self.radial(r);
        Ok([rn * th.cos(), rn * th.sin()])
    }
}

impl InvertibleMap for RadialFixture {
    fn apply_inverse(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let target = p[0].hypot(p[1]);
        let th = p[1].atan2(p[0]) - self.omega;
        let mut r = target;
        for _ in 0..60 {
            let f = self.radial(r) - target;
            let df = 1.0 + self.sign * (self.mu - 3.0 * r * r);
            let dr = f / df;
            r -= dr;
            if dr.abs() <= 1e-16 * r.abs().max(1e-300) {
                break;
            }
        }
        Ok([r * th.cos(), r * th.sin()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert!((wrap(3.5 * PI) + 0.5 * PI).abs() < 1e-12);
        assert_eq!(wrap(PI), PI);
        assert_eq!(wrap(-PI), PI);
    }

    #[test]
    fn fixture_inverse_round_trip() {
        let f = RadialFixture {
            mu: 0.04,
            omega: 0.3,
            sign: -1.0,
        };
        let p = [0.15, -0.07];
        let q = f.apply_inverse(f.apply(p).unwrap()).unwrap();
        assert!((q[0] - p[0]).abs() < 1e-14 && (q[1] - p[1]).abs() < 1e-14);
    }

    #[test]
    fn sweep_margin() {
        let o = DetectOptions::default();
        assert!(matches!(ns_sweep(1.25, &[0.01], SweepSide::Forward, &o), Err(Error::Margin { .. })));
        assert!(matches!(ns_sweep(0.01, &[0.01], SweepSide::Forward, &o), Err(Error::Margin { .. })));
    }
}
