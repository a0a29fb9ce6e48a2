//! End-to-end acceptance checks. Each test writes one `PASS`/`FAIL` line to
//! stdout (bypassing the harness capture) before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use bifkit::circle::{ns_sweep, DetectOptions, Stability, SweepSide, Verdict};
use bifkit::cycle::{
    find_fixed_point, global_12, global_21, ilm_representation, index_sequence, local_iterate, ns_tuned_spec,
    pair_error, params_for_target, params_for_target_with, reduced_lc_sign, rescale_params, return_circle, tau,
    CycleModelConfig, CyclePoint, Dictionary, Precision, Saddle, Which,
};
use bifkit::henon::{
    bifurcation_loci, fixed_points, henon_adapted_jet, lc_closed_form, lomega_scan, multipliers_at, psi_from_m1,
    HenonParams,
};
use bifkit::jet::UnitMultiplier;
use bifkit::normal_form::{lc_direct, lc_partial_incorrect};
use bifkit::Error;
use nalgebra::DVector;

fn report(name: &str, pass: bool, detail: String) {
    let line = format!("{} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "{name}: {detail}");
}

#[test]
fn lyapunov_identity() {
    let start = Instant::now();
    let scan = lomega_scan(100).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let closed_gap = scan
        .rows
        .iter()
        .map(|r| (r.lc_direct - r.lc_closed).abs())
        .fold(0.0, f64::max);
    let oracle_gap = scan
        .rows
        .iter()
        .map(|r| (r.lc_oracle - r.lc_direct).abs())
        .fold(0.0, f64::max);
    let bad_closed = scan.rows.iter().filter(|r| (r.lc_direct - r.lc_closed).abs() > 1e-10).count();
    let bad_oracle = scan.rows.iter().filter(|r| (r.lc_oracle - r.lc_direct).abs() > 1e-9).count();
    let pass = scan.rows.len() == 100 && bad_closed == 0 && bad_oracle == 0 && elapsed < 1.0;
    report(
        "lyapunov-identity",
        pass,
        format!(
            "{} samples; max |direct - closed| = {closed_gap:.3e} ({bad_closed} over 1e-10); \
             max |oracle - direct| = {oracle_gap:.3e} ({bad_oracle} over 1e-9); {elapsed:.3}s",
            scan.rows.len()
        ),
    );
}

#[test]
fn lc_sign_pattern() {
    let scan = lomega_scan(1000).unwrap();
    let mut wrong = Vec::new();
    for r in &scan.rows {
        for v in [r.lc_closed, r.lc_direct] {
            let ok = if r.psi < PI / 2.0 {
                v > 0.0 && r.m1 > -1.0 && r.m1 < 0.0
            } else {
                v < 0.0 && r.m1 > 0.0 && r.m1 < 3.0
            };
            if !ok {
                wrong.push(r.psi);
            }
        }
    }
    // largest |𝓛| on both sides of the pole within 1e-2
    let third = 2.0 * PI / 3.0;
    let peak = (0..=12)
        .flat_map(|k| {
            let d = 1e-2 * 0.5f64.powi(k);
            [third - d, third + d]
        })
        .filter_map(|psi| {
            let jet = henon_adapted_jet(psi).ok()?;
            let mult = UnitMultiplier::new(psi).ok()?;
            Some(lc_direct(&jet, &mult).ok()?.lc.abs())
        })
        .fold(0.0, f64::max);
    let zero = lc_closed_form(psi_from_m1(0.0).unwrap()).unwrap();
    let crossings = scan
        .rows
        .windows(2)
        .filter(|w| w[0].lc_direct.signum() != w[1].lc_direct.signum())
        .map(|w| (w[0].psi, w[1].psi))
        .collect::<Vec<_>>();
    let single_crossing = crossings.len() == 1 && crossings[0].0 < PI / 2.0 && crossings[0].1 > PI / 2.0;
    let pass = wrong.is_empty() && peak > 1e3 && zero.abs() < 1e-15 && single_crossing;
    report(
        "lc-sign-pattern",
        pass,
        format!(
            "{} grid nodes, {} sign violations; max |L| near 2pi/3 = {peak:.3e}; L(pi/2) = {zero:.1e}; \
             sign changes at {crossings:?}",
            scan.rows.len(),
            wrong.len()
        ),
    );
}

#[test]
fn correction_demonstrated() {
    let jet = henon_adapted_jet(PI / 3.0).unwrap();
    let mult = UnitMultiplier::new(PI / 3.0).unwrap();
    let direct = lc_direct(&jet, &mult).unwrap().lc;
    let partial = lc_partial_incorrect(&jet, &mult).unwrap().lc;
    let scan = lomega_scan(100).unwrap();
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("lc_comparison.csv");
    let mut csv = String::from("# columns: psi,m1,lc_closed,lc_direct,lc_oracle,lc_partial_incorrect\n");
    for r in &scan.rows {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.psi, r.m1, r.lc_closed, r.lc_direct, r.lc_oracle, r.lc_incorrect
        ));
    }
    std::fs::write(&path, csv).unwrap();
    let gap = (partial - direct).abs();
    report(
        "correction-demonstrated",
        gap > 1e-6,
        format!(
            "at pi/3 direct = {direct:.6}, partial = {partial:.3e}, gap = {gap:.3e}; table of {} rows in {}",
            scan.rows.len(),
            path.display()
        ),
    );
}

#[test]
fn resonant_points_and_corners() {
    let p0 = psi_from_m1(0.0).unwrap();
    let p54 = psi_from_m1(1.25).unwrap();
    let psi_ok = (p0 - PI / 2.0).abs() <= 1e-12 && (p54 - 2.0 * PI / 3.0).abs() <= 1e-12;
    let bpp = bifurcation_loci(&HenonParams::new(-1.0, 1.0)).b_plus_plus;
    let bmm = bifurcation_loci(&HenonParams::new(3.0, 1.0)).b_minus_minus;
    let bpm = bifurcation_loci(&HenonParams::new(0.0, -1.0)).b_plus_minus;
    let x = match fixed_points(&HenonParams::new(-1.0, 1.0)) {
        Err(Error::SaddleNodeBoundary { x }) => x,
        other => panic!("expected a double root at B++, got {other:?}"),
    };
    let m = multipliers_at(1.0, x);
    let mult_err = (m[0] - 1.0).norm().max((m[1] - 1.0).norm());
    let pass = psi_ok && bpp && bmm && bpm && mult_err <= 1e-10;
    report(
        "resonant-points-and-corners",
        pass,
        format!(
            "psi(0) - pi/2 = {:.1e}, psi(5/4) - 2pi/3 = {:.1e}; B++ {bpp}, B-- {bmm}, B+- {bpm}; \
             multipliers at B++ off (1,1) by {mult_err:.1e}",
            p0 - PI / 2.0,
            p54 - 2.0 * PI / 3.0
        ),
    );
}

#[test]
fn ns_circle_sidedness() {
    let start = Instant::now();
    let opts = DetectOptions::default();
    let attracting = ns_sweep(1.0, &[0.005, 0.01, 0.02, 0.04, -0.01], SweepSide::Forward, &opts).unwrap();
    let repelling = ns_sweep(-0.5, &[-0.01, 0.01], SweepSide::Reverse, &opts).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut ok = true;
    let mut parts = Vec::new();
    for row in &attracting.rows {
        let v = row.report.verdict;
        let good = if row.delta > 0.0 {
            v == Verdict::CircleFound && row.report.thickness_ratio <= 0.05
        } else {
            v == Verdict::FixedPointAttracting
        };
        ok &= good;
        parts.push(format!("m1=1 d={}: {}", row.delta, v.as_str()));
    }
    for row in &repelling.rows {
        let v = row.report.verdict;
        let good = if row.delta < 0.0 {
            v == Verdict::CircleFound && row.report.stability == Stability::Repelling
        } else {
            v != Verdict::CircleFound
        };
        ok &= good;
        parts.push(format!("m1=-0.5 d={} reverse: {}", row.delta, v.as_str()));
    }
    report(
        "ns-circle-sidedness",
        ok && elapsed < 30.0,
        format!("{}; {elapsed:.2}s", parts.join(", ")),
    );
}

#[test]
fn exact_local_and_global_representations() {
    let cfg = CycleModelConfig::reference();
    let mut worst: f64 = 0.0;
    for which in [Saddle::One, Saddle::Two] {
        for k in 1..=30u32 {
            let start = CyclePoint::new(0.17, 2.5e-7, DVector::from_element(1, 0.11));
            let end = local_iterate(&cfg, which, &start, k);
            let (xk, y0, uk) = ilm_representation(&cfg, which, start.x, end.y, &start.u, k);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
            worst = worst
                .max(rel(xk, end.x) / k as f64)
                .max(rel(y0, start.y) / k as f64)
                .max(rel(uk[0], end.u[0]) / k as f64);
        }
    }
    let ilm_ok = worst <= f64::EPSILON;
    let zero = DVector::zeros(1);
    let g12 = global_12(&cfg, &CyclePoint::new(0.0, cfg.y1out, zero.clone()));
    let g21 = global_21(&cfg, 0.0, &CyclePoint::new(0.0, cfg.y2out, zero.clone()));
    let base_ok = g12.x == cfg.x2in && g12.y == 0.0 && g21.x == cfg.x1in && g21.y == 0.0;
    // μ₁ = 0: critical values touch y = 0 at one point, quadratically
    let curve: Vec<(f64, f64)> = (-20..=20)
        .map(|k| {
            let d = 0.005 * k as f64;
            (d, global_21(&cfg, 0.0, &CyclePoint::new(0.0, cfg.y2out + d, zero.clone())).y)
        })
        .collect();
    let touch = curve.iter().filter(|c| c.1 == 0.0).count();
    let quad = curve.iter().all(|&(d, y)| (y - cfg.g21 * d * d).abs() <= 1e-18 && y <= 0.0);
    let pass = ilm_ok && base_ok && touch == 1 && quad;
    report(
        "exact-representations",
        pass,
        format!(
            "local remainder {worst:.1e} eps per iterate (k <= 30); base points exact: {base_ok}; \
             tangency touches once: {}, quadratic: {quad}",
            touch == 1
        ),
    );
}

#[test]
fn rescaling_convergence() {
    let start = Instant::now();
    let cfg = CycleModelConfig::reference();
    let target = HenonParams::new(1.0, 1.02);
    let reference = fixed_points(&target).unwrap().plus.multipliers;
    let mut rows = Vec::new();
    for (i, j) in index_sequence(&cfg, 5..=64) {
        let spec = match params_for_target(&cfg, i, j, target) {
            Ok(s) => s,
            Err(Error::PrecisionCap { .. }) => break,
            Err(e) => panic!("({i},{j}): {e}"),
        };
        let fp = find_fixed_point(&cfg, &spec, Which::Plus, Precision::Double).unwrap();
        let mult_err = pair_error(fp.leading, reference);
        let det_err = ((fp.leading[0] * fp.leading[1]).re - target.m2).abs();
        let ss = fp.spectrum[2..].iter().map(|l| l.norm()).fold(0.0, f64::max);
        rows.push((i, j, mult_err, det_err, ss));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let decreasing = rows.windows(2).all(|w| w[1].2 <= 1.1 * w[0].2);
    let last = rows.last().copied().unwrap();
    let ss_ok = rows.iter().all(|r| r.4 < 0.5);
    let pass = rows.len() >= 2 && decreasing && last.2 < 1e-2 && last.3 < 1e-2 && ss_ok && elapsed < 60.0;
    let trail: Vec<String> = rows.iter().map(|r| format!("({},{}) {:.3e}", r.0, r.1, r.2)).collect();
    report(
        "rescaling-convergence",
        pass,
        format!(
            "mult_err {}; decreasing: {decreasing}; final det_err {:.1e}; max strong-stable modulus {:.1e}; {elapsed:.2}s",
            trail.join(", "),
            last.3,
            rows.iter().map(|r| r.4).fold(0.0, f64::max)
        ),
    );
}

#[test]
fn lc_sign_transfer() {
    let cfg = CycleModelConfig::reference();
    let mut parts = Vec::new();
    let mut ok = true;
    for m1 in [-0.5, 0.5, 1.0, 2.0] {
        let (i, j, spec) = index_sequence(&cfg, 5..=64)
            .into_iter()
            .map_while(|(i, j)| {
                ns_tuned_spec(&cfg, i, j, m1, Dictionary::Conjugate, Precision::Double)
                    .ok()
                    .map(|s| (i, j, s))
            })
            .last()
            .unwrap();
        let expected = lc_closed_form(psi_from_m1(m1).unwrap()).unwrap().signum();
        let got = reduced_lc_sign(&cfg, &spec, Precision::Double);
        let good = matches!(&got, Ok(r) if r.sign == expected);
        ok &= good;
        parts.push(format!(
            "m1={m1} at ({i},{j}): {} vs {expected}",
            got.map(|r| r.sign.to_string()).unwrap_or_else(|e| e.to_string())
        ));
    }
    report("lc-sign-transfer", ok, parts.join(", "));
}

#[test]
fn increasing_period_circles() {
    let cfg = CycleModelConfig::reference();
    let opts = DetectOptions::default();
    let target = HenonParams::new(1.0, 1.02);
    let mut found = Vec::new();
    let mut tried = Vec::new();
    for (i, j) in index_sequence(&cfg, 5..=64) {
        let spec = match params_for_target_with(&cfg, i, j, target, Dictionary::Conjugate, Precision::Double) {
            Ok(s) => s,
            Err(_) => break,
        };
        match return_circle(&cfg, &spec, Dictionary::Conjugate, Precision::Double, &opts) {
            Ok(rc) => {
                tried.push(format!("({i},{j}) {}", rc.report.verdict.as_str()));
                if rc.report.verdict == Verdict::CircleFound
                    && rc.report.stability == Stability::Attracting
                    && rc.report.thickness_ratio <= 0.05
                {
                    found.push(tau(i, j));
                }
            }
            Err(e) => tried.push(format!("({i},{j}) error: {e}")),
        }
    }
    found.dedup();
    let increasing = found.windows(2).all(|w| w[1] > w[0]);
    report(
        "increasing-period-circles",
        found.len() >= 3 && increasing,
        format!("circles at tau {found:?}; {}", tried.join(", ")),
    );
}

#[test]
fn dictionary_bijectivity() {
    let cfg = CycleModelConfig::reference();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in [4, 6, 8] {
        for a in 0..5 {
            for b in 0..5 {
                let target = HenonParams::new(-2.0 + 6.0 * (a as f64 + 0.5) / 5.0, 0.5 + (b as f64 + 0.5) / 5.0);
                let spec = params_for_target(&cfg, k, k, target).unwrap();
                let back = rescale_params(&cfg, &spec).unwrap();
                let rel = ((back.m1 - target.m1).abs() / target.m1.abs())
                    .max((back.m2 - target.m2).abs() / target.m2.abs());
                worst = worst.max(rel);
                count += 1;
            }
        }
    }
    report(
        "dictionary-bijectivity",
        worst <= 1e-9,
        format!("{count} round trips, worst relative error {worst:.2e}"),
    );
}
