use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use einkit::orbit::{parse_point, to_csv, to_json};
use einkit::suite::{all_passed, reports_json, summary_line};
use einkit::{case_lines, check_case, orbit_table, render, run_suite, FigureKind, RunConfig, Suite};
use einkit::{EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "einkit", version, about = "Conformally flat Lorentzian structures with unipotent holonomy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification checks; exits 1 if any check fails.
    Verify {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Write the reports as a JSON array.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Test the holonomy conditions of the declared case.
    CaseCheck { config: PathBuf },
    /// Tabulate the orbit of q0 under the configured generator.
    Orbit {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        i_max: i64,
        /// Starting point as x_1,...,x_n,theta.
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a cross-section of the cover as SVG.
    Figure {
        #[arg(long, value_enum)]
        kind: FigureKind,
        #[arg(long)]
        out: PathBuf,
        /// Config supplying the generator for the domain figure.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Failure to even start: reported with exit code 2.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, Usage> {
    match cli.command {
        Command::Verify { config, suite, json } => {
            let cfg = RunConfig::load(&config)?;
            let reports = run_suite(&cfg, suite)?;
            for r in &reports {
                println!("{}", summary_line(r));
            }
            if let Some(path) = json {
                write_out(Some(&path), &reports_json(&reports)?)?;
            }
            Ok(if all_passed(&reports) { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::CaseCheck { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = check_case(&cfg)?;
            for line in case_lines(&report) {
                println!("{line}");
            }
            Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Orbit { config, i_max, q0, format, out } => {
            let cfg = RunConfig::load(&config)?;
            let q0 = q0.map(|s| parse_point(&s, cfg.n)).transpose()?;
            let table = orbit_table(&cfg, i_max, q0.as_ref())?;
            let text = match format {
                TableFormat::Csv => to_csv(&table)?,
                TableFormat::Json => to_json(&table)?,
            };
            write_out(out.as_deref(), &text)?;
            if table.divergent {
                eprintln!("divergent: {}", table.detail);
            }
            Ok(EXIT_PASS)
        }
        Command::Figure { kind, out, config } => {
            let cfg = config.map(|p| RunConfig::load(&p)).transpose()?;
            write_out(Some(&out), &render(kind, cfg.as_ref())?)?;
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    };
    ExitCode::from(code as u8)
}
