//! One PASS/FAIL line per acceptance criterion. Every threshold is pinned
//! here as a constant; the checks themselves come from the verify harness.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use einkit_core::quadric::FormContext;
use einkit_core::unipotent::HeisenbergSpec;
use einkit_core::verify::{
    case2_example, case3_example, check_algebra, check_asymptotics, check_causal_oracle, check_complement,
    check_lift_homomorphism, check_min_boundary, check_min_patches, check_properness, check_simply_transitive,
    check_tau_limits, check_tau_matrix, check_tau_pairing, check_tiling, check_vector_fields, rotation_spec,
    Case2Example, CheckReport, SampleConfig,
};
use nalgebra::{DMatrix, DVector};

const SAMPLES: usize = 10_000;
const MAX_SKIPPED_FRACTION: f64 = 0.01;
const TAU_MATRIX_TOL: f64 = 1e-10;
const TAU_MATRIX_POINTS: usize = 1_000;
const LIMIT_TOL: f64 = 1e-2;
const LIMIT_POINTS_PER_SIDE: usize = 1_000;
const PAIRING_BAND: f64 = 1e-9;
const ALGEBRA_TOL: f64 = 1e-10;
const ALGEBRA_ELEMENTS: usize = 1_000;
const LIFT_TOL: f64 = 1e-8;
const LIFT_TRIPLES: usize = 100;
const MIN_COVERAGE: f64 = 0.999;
const CUBIC_REL_TOL: f64 = 0.01;
const SOLVE_TOL: f64 = 1e-9;
const SOLVE_PAIRS: usize = 1_000;
const MONOTONE_DECADES: usize = 6;
const BRACKET_TOL: f64 = 1e-5;
const INVARIANCE_TOL: f64 = 1e-7;
const ORACLE_PAIRS: usize = 1_000;

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line { pass, detail: detail.into() }
}

fn metric(r: &CheckReport, key: &str) -> f64 {
    *r.metrics.get(key).unwrap_or_else(|| panic!("{}: missing metric {key}", r.name))
}

fn cfg() -> SampleConfig {
    SampleConfig { samples: SAMPLES, ..SampleConfig::default() }
}

fn complement() -> Line {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [3, 4, 5] {
        let r = check_complement(&cfg().with_n(n)).unwrap();
        let total = r.samples + r.skipped;
        pass &= total == SAMPLES && r.failures == 0 && r.skipped_fraction() < MAX_SKIPPED_FRACTION;
        parts.push(format!("n={n}: {} failures, skipped {:.4}", r.failures, r.skipped_fraction()));
    }
    line(pass, format!("{} (skipped < {MAX_SKIPPED_FRACTION})", parts.join("; ")))
}

fn patches() -> Line {
    let p = check_min_patches(&cfg()).unwrap();
    let b = check_min_boundary(&cfg()).unwrap();
    let identity = metric(&p, "identity_failures");
    let pass = p.samples == SAMPLES && p.failures == 0 && identity == 0.0 && b.samples == SAMPLES && b.failures == 0;
    line(
        pass,
        format!(
            "patches {} failures, Min^+(p) != Min^-(alpha p) on {identity} samples; boundary {} failures",
            p.failures, b.failures
        ),
    )
}

fn tau_flow() -> Line {
    let c = cfg();
    let m = check_tau_matrix(&c).unwrap();
    let l = check_tau_limits(&c).unwrap();
    let p = check_tau_pairing(&c).unwrap();
    let sides = [metric(&l, "max_limit_distance_min_minus"), metric(&l, "max_limit_distance_min_plus")];
    let pass = m.samples >= TAU_MATRIX_POINTS
        && m.passed()
        && m.max_residual < TAU_MATRIX_TOL
        && l.samples >= 2 * LIMIT_POINTS_PER_SIDE
        && l.passed()
        && sides.iter().all(|d| *d <= LIMIT_TOL)
        && p.passed()
        && p.max_residual <= PAIRING_BAND;
    line(
        pass,
        format!(
            "matrix {:.2e} < {TAU_MATRIX_TOL:e} on {}; limits {:.2e}/{:.2e} <= {LIMIT_TOL:e} on {} per side; \
             pairing excess {:.2e} <= {PAIRING_BAND:e}, {} failures",
            m.max_residual, m.samples, sides[0], sides[1], LIMIT_POINTS_PER_SIDE, p.max_residual, p.failures
        ),
    )
}

fn algebra() -> Line {
    let c = cfg().with_n(4);
    let a = check_algebra(&c).unwrap();
    let h = check_lift_homomorphism(&c).unwrap();
    let pass = a.samples >= ALGEBRA_ELEMENTS
        && a.passed()
        && a.max_residual < ALGEBRA_TOL
        && h.samples >= LIFT_TRIPLES
        && h.passed()
        && h.max_residual < LIFT_TOL;
    line(
        pass,
        format!(
            "algebra {:.2e} < {ALGEBRA_TOL:e} on {}; lift {:.2e} < {LIFT_TOL:e} on {}",
            a.max_residual, a.samples, h.max_residual, h.samples
        ),
    )
}

fn case2() -> Line {
    let c = cfg();
    let ctx = FormContext::new(c.n).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, kind) in [("timelike", Case2Example::TimelikeTranslation), ("generic", Case2Example::Generic)] {
        let spec = case2_example(&ctx, kind).unwrap();
        let r = check_tiling(&c, &spec).unwrap();
        let (cov, mult) = (metric(&r, "coverage"), metric(&r, "multiplicity_failures"));
        pass &= r.passed() && r.samples + r.skipped == SAMPLES && mult == 0.0 && cov >= MIN_COVERAGE;
        parts.push(format!(
            "{label}: coverage {cov:.4}, {mult} multiple, {} uncovered in scan, {} band, {} beyond scan",
            metric(&r, "coverage_failures"),
            metric(&r, "boundary_band"),
            metric(&r, "beyond_scan")
        ));
        if kind == Case2Example::Generic {
            let a = check_asymptotics(&c, Some(&spec.generators[0].body)).unwrap();
            let rel = metric(&a, "max_relative_cubic_error");
            pass &= a.passed() && rel <= CUBIC_REL_TOL;
            parts.push(format!("cubic coefficient error {rel:.2e} <= {CUBIC_REL_TOL}"));
        }
    }
    let null = case2_example(&ctx, Case2Example::NullTranslation).unwrap();
    let r = check_tiling(&c, &null).unwrap();
    let cov = metric(&r, "coverage");
    pass &= !r.passed() && cov < MIN_COVERAGE;
    parts.push(format!("null control coverage {cov:.4} < {MIN_COVERAGE} (fails as required)"));
    line(pass, parts.join("; "))
}

fn case3() -> Line {
    let c = cfg();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [1, 2] {
        let hull = rotation_spec(k).unwrap();
        let r = check_simply_transitive(&c, &hull).unwrap();
        // three hyperplanes plus the lightcone chart
        pass &= r.passed() && r.samples >= SOLVE_PAIRS && r.max_residual < SOLVE_TOL && metric(&r, "hyperplanes") == 3.0;
        parts.push(format!("k={k}: {:.2e} < {SOLVE_TOL:e} on {} pairs", r.max_residual, r.samples));
    }
    let hull = HeisenbergSpec::new(1, DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).unwrap();
    let r = check_simply_transitive(&c, &hull).unwrap();
    let detected = r.metrics.keys().any(|k| k.starts_with("degenerate_dimension_r="));
    let c4 = c.with_n(hull.n());
    let ctx = FormContext::new(hull.n()).unwrap();
    let p = check_properness(&c4, &case3_example(&ctx, &hull, 1.0).unwrap()).unwrap();
    let (early, late) = (
        metric(&p, &format!("count_R{:02}", c4.word_ball - 2)),
        metric(&p, &format!("count_R{:02}", c4.word_ball)),
    );
    pass &= !r.passed() && detected && late > early;
    parts.push(format!(
        "real eigenvalue: uniqueness fails ({}), properness count grows {early} -> {late}",
        r.notes.join(", ")
    ));
    line(pass, parts.join("; "))
}

fn fields() -> Line {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [4, 5] {
        let r = check_vector_fields(&cfg().with_n(n)).unwrap();
        let (b, i) = (metric(&r, "max_bracket_mod_photon"), metric(&r, "max_invariance_mod_photon"));
        // failures include any break in the monotone decay across the decades
        pass &= r.passed() && metric(&r, "decades") >= MONOTONE_DECADES as f64 && b < BRACKET_TOL && i < INVARIANCE_TOL;
        parts.push(format!("n={n}: brackets {b:.2e} < {BRACKET_TOL:e}, invariance {i:.2e} < {INVARIANCE_TOL:e}"));
    }
    line(pass, format!("monotone over {MONOTONE_DECADES} decades; {}", parts.join("; ")))
}

fn causal_oracle() -> Line {
    let r = check_causal_oracle(&cfg().with_n(3)).unwrap();
    line(
        r.passed() && r.samples >= ORACLE_PAIRS,
        format!(
            "{} disagreements beyond one cell on {} pairs, exact agreement {:.3}",
            r.failures,
            r.samples,
            metric(&r, "exact_agreement")
        ),
    )
}

fn run_bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_einkit")).args(args).env_remove("EINKIT_SEED").output().unwrap()
}

fn determinism() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = d.join("config.json");
    std::fs::write(&config, r#"{"n": 3, "seed": 7}"#).unwrap();
    let path = |name: &str| d.join(name).to_str().unwrap().to_string();
    let cfg_path = config.to_str().unwrap();
    let mut identical = true;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let json = path(&format!("{run}.json"));
        let status = run_bin(&["verify", cfg_path, "--suite", "all", "--json", &json]).status;
        identical &= status.success();
        outputs.push(json);
        for kind in ["lightcone", "photon", "domain"] {
            let svg = path(&format!("{kind}-{run}.svg"));
            identical &= run_bin(&["figure", "--kind", kind, "--out", &svg]).status.success();
            outputs.push(svg);
        }
    }
    let read = |p: &String| std::fs::read(Path::new(p)).unwrap();
    let half = outputs.len() / 2;
    let same = (0..half).filter(|&i| read(&outputs[i]) == read(&outputs[half + i])).count();
    identical &= same == half;
    line(identical, format!("{same}/{half} outputs byte-identical across two runs (JSON report + 3 SVG)"))
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Line); 9] = [
        ("complement identities", complement),
        ("Minkowski patch identities", patches),
        ("tau flow", tau_flow),
        ("unipotent algebra and lift", algebra),
        ("case-2 tiling", case2),
        ("case-3 simple transitivity", case3),
        ("vector fields", fields),
        ("causal oracle", causal_oracle),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let l = run();
        println!(
            "{} {}. {name}: {} ({:.1}s)",
            if l.pass { "PASS" } else { "FAIL" },
            i + 1,
            l.detail,
            t.elapsed().as_secs_f64()
        );
        if !l.pass {
            failed.push(i + 1);
        }
    }
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
