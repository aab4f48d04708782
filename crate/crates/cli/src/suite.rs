use einkit_core::unipotent::HolonomyCaseSpec;
use einkit_core::verify::{
    case2_example, case3_example, check_algebra, check_asymptotics, check_causal_oracle, check_complement,
    check_essential_indicator, check_lift_homomorphism, check_min_boundary, check_min_patches, check_properness,
    check_simply_transitive, check_tau_limits, check_tau_matrix, check_tau_pairing, check_tiling,
    check_vector_fields, rotation_spec, Case2Example, CheckReport, SampleConfig,
};
use einkit_core::quadric::FormContext;

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Causal,
    Case2,
    Case3,
    Fields,
}

pub fn run_suite(cfg: &RunConfig, suite: Suite) -> anyhow::Result<Vec<CheckReport>> {
    let base = cfg.sample_config();
    let mut out = Vec::new();
    if matches!(suite, Suite::All | Suite::Causal) {
        causal(&base, &mut out)?;
    }
    if matches!(suite, Suite::All | Suite::Case2) {
        case2(cfg, &base, &mut out)?;
    }
    if matches!(suite, Suite::All | Suite::Case3) {
        case3(cfg, &base, &mut out)?;
    }
    if matches!(suite, Suite::All | Suite::Fields) {
        for n in [4, 5] {
            out.push(check_vector_fields(&base.with_n(n))?);
        }
    }
    Ok(out)
}

fn causal(base: &SampleConfig, out: &mut Vec<CheckReport>) -> anyhow::Result<()> {
    for n in [3, 4, 5] {
        out.push(check_complement(&base.with_n(n))?);
    }
    out.push(check_min_boundary(base)?);
    out.push(check_min_patches(base)?);
    out.push(check_causal_oracle(&base.with_n(3))?);
    out.push(check_tau_matrix(base)?);
    out.push(check_tau_pairing(base)?);
    out.push(check_tau_limits(base)?);
    let n = base.n.max(4);
    out.push(check_algebra(&base.with_n(n))?);
    out.push(check_lift_homomorphism(&base.with_n(n))?);
    for case in 1..=4 {
        out.push(check_essential_indicator(&base.with_n(n), case)?);
    }
    Ok(())
}

/// Tiling and orbit asymptotics for each configured generator, or for the
/// built-in timelike and generic examples when none is given.
fn case2(cfg: &RunConfig, base: &SampleConfig, out: &mut Vec<CheckReport>) -> anyhow::Result<()> {
    let ctx = cfg.context()?;
    let specs: Vec<HolonomyCaseSpec> = if cfg.generators.is_empty() {
        [Case2Example::TimelikeTranslation, Case2Example::Generic]
            .into_iter()
            .map(|k| case2_example(&ctx, k))
            .collect::<Result<_, _>>()?
    } else {
        cfg.lifted_generators(&ctx)?
            .into_iter()
            .map(|g| HolonomyCaseSpec { case: 2, generators: vec![g], case3: None })
            .collect()
    };
    for spec in &specs {
        out.push(check_tiling(base, spec)?);
        let g = &spec.generators[0];
        // the cubic term only exists for w != 0
        if g.alpha_power == 0 && g.body.ell().amax() > 0.0 {
            out.push(check_asymptotics(base, Some(&g.body))?);
        }
    }
    if cfg.generators.is_empty() {
        out.push(check_asymptotics(&base.with_n(base.n.max(4)), None)?);
    }
    Ok(())
}

fn case3(cfg: &RunConfig, base: &SampleConfig, out: &mut Vec<CheckReport>) -> anyhow::Result<()> {
    let hulls = match cfg.hull()? {
        Some(h) => vec![(h, cfg.heisenberg.as_ref().map_or(1.0, |h| h.scale))],
        None => vec![(rotation_spec(1)?, 1.0), (rotation_spec(2)?, 1.0)],
    };
    for (hull, scale) in hulls {
        out.push(check_simply_transitive(base, &hull)?);
        let c = base.with_n(hull.n());
        let ctx = FormContext::new(hull.n())?.with_tol(c.tol)?;
        out.push(check_properness(&c, &case3_example(&ctx, &hull, scale)?)?);
    }
    Ok(())
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(CheckReport::passed)
}

/// One line per report.
pub fn summary_line(r: &CheckReport) -> String {
    format!(
        "{} {:<24} n={} samples={} failures={} skipped={} max_residual={:.3e}  [{}]",
        if r.passed() { "PASS" } else { "FAIL" },
        r.name,
        r.n,
        r.samples,
        r.failures,
        r.skipped,
        r.max_residual,
        r.paper_anchor
    )
}

pub fn reports_json(reports: &[CheckReport]) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(reports)?;
    s.push('\n');
    Ok(s)
}
