use std::f64::consts::PI;

use bifkit::circle::{ns_sweep, DetectOptions, SweepSide};
use bifkit::cycle::{
    check_precision, convergence_study, index_sequence, params_for_target_with, validate, CycleModelConfig, Dictionary, Precision,
};
use bifkit::henon::{self, HenonParams, MARKED_POINTS};
use bifkit::jet::{PlanarJet, UnitMultiplier};
use bifkit::normal_form::{lc_direct, lc_oracle, lc_partial_incorrect};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde_json::json;

use crate::output::{num, Csv, Run, Svg};
use crate::{
    CycleVerifyArgs, DictionaryArg, Failure, Globals, HenonCircleArgs, HenonDiagramArgs, LyapScanArgs, NfLcArgs,
    Preset,
};

type Outcome = std::result::Result<(), Failure>;

fn precision(g: &Globals) -> Precision {
    if g.extended {
        Precision::Extended
    } else {
        Precision::Double
    }
}

fn bool_cell(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

pub fn lyap_scan(g: &Globals, a: &LyapScanArgs) -> Outcome {
    if a.out.contains('/') || a.out.is_empty() {
        return Err(Failure::Usage(format!("--out must be a plain file name, got {:?}", a.out)));
    }
    let scan = henon::lomega_scan(a.samples as usize)?;
    let mut run = Run::new(&g.out_dir, "lyap-scan", json!({ "samples": a.samples, "out": a.out }))?;

    let mut csv = Csv::new(&["psi", "m1", "lc_closed", "lc_direct", "lc_oracle", "lc_partial_incorrect", "identity_ok"]);
    for gap in &scan.gaps {
        csv.comment(&format!(
            "gap {} at psi={} (nearest nodes {} and {})",
            gap.label,
            num(gap.psi),
            num(gap.below),
            num(gap.above)
        ));
    }
    for r in &scan.rows {
        csv.row(&[
            num(r.psi),
            num(r.m1),
            num(r.lc_closed),
            num(r.lc_direct),
            num(r.lc_oracle),
            num(r.lc_incorrect),
            bool_cell(r.identity_ok()),
        ]);
    }
    run.write(&a.out, &csv.into_string())?;

    // Log-compressed y axis keeps the pole from flattening everything else.
    let squash = |v: f64| v.signum() * (1.0 + v.abs()).log10();
    let series = |f: fn(&henon::LomegaRow) -> f64| -> Vec<[f64; 2]> {
        scan.rows.iter().map(|r| [r.psi, squash(f(r))]).collect()
    };
    let mut svg = Svg::new((0.0, PI), (-8.0, 8.0), "psi", "sign(L) log10(1+|L|)");
    svg.polyline(&series(|r| r.lc_closed), "black", "closed form");
    svg.polyline(&series(|r| r.lc_direct), "blue", "direct");
    svg.polyline(&series(|r| r.lc_oracle), "green", "oracle");
    svg.polyline(&series(|r| r.lc_incorrect), "red", "partial (incorrect)");
    for gap in &scan.gaps {
        svg.vline(gap.psi, gap.label);
    }
    let stem = a.out.strip_suffix(".csv").unwrap_or(&a.out);
    run.write(&format!("{stem}.svg"), &svg.into_string())?;
    run.finish()?;
    Ok(())
}

pub fn henon_diagram(g: &Globals, a: &HenonDiagramArgs) -> Outcome {
    let (lo, hi) = (a.m2_range[0], a.m2_range[1]);
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Failure::Usage(format!("--m2-range needs LO < HI, got {lo} {hi}")));
    }
    let diagram = henon::diagram_data(lo, hi, a.resolution as usize)?;
    let mut run = Run::new(
        &g.out_dir,
        "henon-diagram",
        json!({ "m2_range": [lo, hi], "resolution": a.resolution }),
    )?;

    let mut csv = Csv::new(&["kind", "label", "m1", "m2"]);
    for c in &diagram.curves {
        for p in &c.points {
            csv.row(&["curve".into(), c.label.into(), num(p[0]), num(p[1])]);
        }
    }
    for m in &diagram.markers {
        csv.row(&["marker".into(), m.label.into(), num(m.m1), num(m.m2)]);
    }
    run.write("henon_diagram.csv", &csv.into_string())?;

    let mut svg = Svg::new((-2.0, 4.0), (lo, hi), "M1", "M2");
    let colors = ["black", "blue", "red", "green", "purple"];
    for (c, color) in diagram.curves.iter().zip(colors.iter().cycle()) {
        svg.polyline(&c.points, color, c.label);
    }
    for (label, m1, m2) in MARKED_POINTS {
        svg.marker(m1, m2, label);
    }
    run.write("henon_diagram.svg", &svg.into_string())?;
    run.finish()?;
    Ok(())
}

pub fn henon_circle(g: &Globals, a: &HenonCircleArgs) -> Outcome {
    let deltas = match &a.deltas {
        Some(d) if d.is_empty() => return Err(Failure::Usage("--deltas is empty".into())),
        Some(d) => d.clone(),
        None => {
            let s = if a.repelling { -1.0 } else { 1.0 };
            [0.005, 0.01, 0.02, 0.04].iter().map(|d| s * d).collect()
        }
    };
    let opts = DetectOptions {
        burn_in: a.burn_in,
        samples: a.detect_samples,
        ..DetectOptions::default()
    };
    let side = if a.repelling { SweepSide::Reverse } else { SweepSide::Forward };
    let sweep = ns_sweep(a.m1, &deltas, side, &opts)?;
    let mut run = Run::new(
        &g.out_dir,
        "henon-circle",
        json!({ "m1": a.m1, "deltas": deltas, "repelling": a.repelling, "detect": opts }),
    )?;
    let mut csv = Csv::new(&[
        "delta",
        "m2",
        "verdict",
        "stability",
        "expected_circle",
        "center_x",
        "center_y",
        "mean_radius",
        "thickness_ratio",
        "rotation_number",
        "contraction_rate",
        "iterations",
    ]);
    csv.comment(&format!("m1={} lc_sign={} sidedness_ok={}", num(sweep.m1_star), sweep.lc_sign, sweep.sidedness_ok));
    for r in &sweep.rows {
        let rep = &r.report;
        csv.row(&[
            num(r.delta),
            num(1.0 + r.delta),
            rep.verdict.as_str().into(),
            serde_json::to_value(rep.stability)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            bool_cell(r.expected_circle),
            num(rep.center[0]),
            num(rep.center[1]),
            num(rep.mean_radius),
            num(rep.thickness_ratio),
            num(rep.rotation_number),
            num(rep.contraction_rate),
            rep.iterations_used.to_string(),
        ]);
    }
    run.write("henon_circle.csv", &csv.into_string())?;
    run.finish()?;
    Ok(())
}

fn random_adapted_jet(rng: &mut impl Rng, nu: Complex64) -> PlanarJet {
    let mut terms = vec![((1, 0), nu)];
    for n in 2..=3 {
        for q in 0..=n {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            terms.push(((n - q, q), c));
        }
    }
    PlanarJet::from_terms(3, &terms).expect("degree 3 is supported")
}

pub fn nf_lc(g: &Globals, a: &NfLcArgs) -> Outcome {
    let mult = UnitMultiplier::new(a.psi)?;
    mult.require_regular()?;
    let mut input = Vec::new();
    let (source, jet) = match (&a.jet, a.preset) {
        (Some(path), _) => {
            input = std::fs::read(path).map_err(|e| Failure::Io(anyhow::anyhow!("reading {}: {e}", path.display())))?;
            let v: serde_json::Value =
                serde_json::from_slice(&input).map_err(|e| bifkit::Error::Json(e.to_string()))?;
            (path.display().to_string(), PlanarJet::from_json(&v)?)
        }
        (None, Some(Preset::Henon)) => ("preset:henon".to_string(), henon::henon_adapted_jet(a.psi)?),
        (None, None) => return Err(Failure::Usage("one of --jet or --preset is required".into())),
    };
    let evaluate = |jet: &PlanarJet| -> Result<serde_json::Value, bifkit::Error> {
        Ok(json!({
            "direct": lc_direct(jet, &mult)?,
            "oracle": lc_oracle(jet, &mult)?,
            "partial_incorrect": lc_partial_incorrect(jet, &mult)?,
        }))
    };
    let mut result = json!({
        "psi": a.psi,
        "source": source,
        "jet": jet.to_json(),
        "values": evaluate(&jet)?,
    });
    if a.random > 0 {
        let mut rng = rand::rngs::StdRng::seed_from_u64(g.seed);
        let mut rows = Vec::with_capacity(a.random);
        for _ in 0..a.random {
            let j = random_adapted_jet(&mut rng, mult.nu());
            rows.push(json!({ "jet": j.to_json(), "values": evaluate(&j)? }));
        }
        result["random"] = json!({ "seed": g.seed, "jets": rows });
    }
    let text = serde_json::to_string_pretty(&result).map_err(|e| Failure::Io(e.into()))? + "\n";
    let mut run = Run::new(
        &g.out_dir,
        "nf-lc",
        json!({ "psi": a.psi, "source": source, "random": a.random, "seed": g.seed }),
    )?;
    run.hash_input(&input);
    run.write("nf_lc.json", &text)?;
    run.finish()?;
    print!("{text}");
    Ok(())
}

fn parse_pairs(s: &str) -> Result<Vec<(u32, u32)>, Failure> {
    s.split(',')
        .map(|p| {
            let (i, j) = p
                .trim()
                .split_once(':')
                .ok_or_else(|| Failure::Usage(format!("pair {p:?} is not of the form i:j")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Failure::Usage(format!("pair {p:?} has a non-integer index")))
            };
            Ok((parse(i)?, parse(j)?))
        })
        .collect()
}

pub fn cycle_verify(g: &Globals, a: &CycleVerifyArgs) -> Outcome {
    if a.target.len() != 2 {
        return Err(Failure::Usage(format!("--target needs m1,m2, got {} values", a.target.len())));
    }
    let target = HenonParams::new(a.target[0], a.target[1]);
    let mut input = Vec::new();
    let cfg = match &a.config {
        Some(path) => {
            input = std::fs::read(path).map_err(|e| Failure::Io(anyhow::anyhow!("reading {}: {e}", path.display())))?;
            let text = String::from_utf8(input.clone()).map_err(|e| bifkit::Error::Toml(e.to_string()))?;
            CycleModelConfig::from_toml(&text)?
        }
        None => CycleModelConfig::reference(),
    };
    let precision = precision(g);
    let dictionary = match a.dictionary {
        DictionaryArg::Literal => Dictionary::Literal,
        DictionaryArg::Conjugate => Dictionary::Conjugate,
    };

    let mut run = Run::new(
        &g.out_dir,
        "cycle-verify",
        json!({
            "config": a.config.as_ref().map(|p| p.display().to_string()),
            "target": [target.m1, target.m2],
            "ij_sequence": a.ij_sequence,
            "j_min": a.j_min,
            "dictionary": a.dictionary,
            "precision": precision,
        }),
    )?;
    run.hash_input(&input);
    if a.config.is_none() {
        run.hash_input(cfg.to_toml().as_bytes());
    }

    let report = validate(&cfg);
    run.write(
        "cycle_validation.json",
        &(serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.into()))? + "\n"),
    )?;
    if !report.all_passed() {
        let failed: Vec<String> = report.failures().map(|c| format!("{} ({})", c.name, c.detail)).collect();
        run.finish()?;
        return Err(Failure::Validation(format!("configuration checks failed: {}", failed.join(", "))));
    }

    let requested = if a.ij_sequence.trim() == "auto" {
        index_sequence(&cfg, a.j_min..a.j_min + 100)
    } else {
        parse_pairs(&a.ij_sequence)?
    };
    let within_cap = |&(i, j): &(u32, u32)| check_precision(&cfg, i, j, 1.0, precision).is_ok();
    let pairs: Vec<(u32, u32)> = requested.iter().copied().take_while(within_cap).collect();
    let dropped = requested.len() - pairs.len();
    if pairs.is_empty() {
        run.finish()?;
        return Err(Failure::Validation("no (i, j) pair lies below the precision cap".into()));
    }

    let (i0, j0) = pairs[0];
    if let Err(e) = params_for_target_with(&cfg, i0, j0, target, dictionary, precision) {
        run.finish()?;
        return Err(e.into());
    }
    let rows = convergence_study(&cfg, target, &pairs, dictionary, precision, &DetectOptions::default())?;
    let mut csv = Csv::new(&[
        "i",
        "j",
        "tau",
        "m1",
        "m2",
        "mult_err",
        "det_err",
        "ss_max",
        "lc_sign",
        "circle_verdict",
    ]);
    csv.comment(&format!(
        "target=({},{}) dictionary={:?} precision={:?} cap={:e}",
        num(target.m1),
        num(target.m2),
        dictionary,
        precision,
        precision.cap()
    ));
    if dropped > 0 {
        let (i, j) = requested[pairs.len()];
        csv.comment(&format!("sequence truncated at the precision cap: ({i},{j}) and later pairs omitted"));
    }
    for r in &rows {
        csv.row(&[
            r.i.to_string(),
            r.j.to_string(),
            r.tau.to_string(),
            num(r.m1),
            num(r.m2),
            num(r.mult_err),
            num(r.det_err),
            num(r.ss_max),
            num(r.lc_sign),
            format!("\"{}\"", r.circle_verdict.replace('"', "'")),
        ]);
    }
    run.write("cycle_convergence.csv", &csv.into_string())?;
    run.finish()?;
    Ok(())
}
