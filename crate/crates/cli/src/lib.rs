//! Library side of the `einkit` command-line tool: configuration, the
//! verification suites, holonomy case checks, orbit tables and figures.

pub mod config;
pub mod figure;
pub mod orbit;
pub mod suite;

use einkit_core::unipotent::{case_check, CaseReport};

pub use config::RunConfig;
pub use figure::{render, FigureKind};
pub use orbit::{orbit_table, OrbitTable};
pub use suite::{run_suite, Suite};

/// Exit code for a run whose checks all pass.
pub const EXIT_PASS: i32 = 0;
/// Exit code when at least one check fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

pub fn check_case(cfg: &RunConfig) -> anyhow::Result<CaseReport> {
    let ctx = cfg.context()?;
    Ok(case_check(&ctx, &cfg.case_spec(&ctx)?))
}

pub fn case_lines(report: &CaseReport) -> Vec<String> {
    let mut lines: Vec<String> = report
        .conditions
        .iter()
        .map(|c| {
            format!("{} {:<28} [{}] {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.anchor, c.detail)
        })
        .collect();
    lines.push(format!("case {}: {}", report.case, if report.passed() { "PASS" } else { "FAIL" }));
    lines
}
