use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use concentra::experiments;
use concentra::oracle_suite::run_oracle_suite;
use concentra::output::Report;
use concentra::selftest;
use concentra::ExperimentConfig;
use concentra_core::report::Verdict;

#[derive(Parser)]
#[command(
    name = "concentra",
    version,
    about = "Concentration and chaos bound verification harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Force exact enumeration paths
    #[arg(long)]
    exact: bool,
    /// Monte Carlo sample count (overrides the config)
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a config and list every problem
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one experiment, or every config listed in a manifest
    Run {
        #[arg(
            long,
            required_unless_present = "manifest",
            conflicts_with = "manifest"
        )]
        config: Option<PathBuf>,
        /// File listing one config path per line
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Summarize a report and rewrite its table
    Report {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle cross-check suite
    Oracle {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in experiment battery (reports carry no timing)
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "selftest-out")]
        out: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 1;

fn exit(v: Verdict) -> ExitCode {
    ExitCode::from(v.exit_code() as u8)
}

fn run_one(path: &Path, o: &Overrides) -> Result<Verdict> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(n) = o.samples {
        cfg.samples = Some(n);
    }
    cfg.exact |= o.exact;
    if let Some(d) = &o.out {
        cfg.output.dir = Some(d.clone());
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let report = experiments::run(&cfg, base, true);
    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let (json, table) = report.write(&dir, &cfg.stem())?;
    print!("{}", report.summary());
    println!("  wrote {} and {}", json.display(), table.display());
    Ok(report.verdict)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!("{}: ok ({})", config.display(), cfg.kind.name());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            manifest,
            overrides,
        } => {
            let paths = match (config, manifest) {
                (Some(c), _) => vec![c],
                (None, Some(m)) => {
                    let text = std::fs::read_to_string(&m)
                        .with_context(|| format!("cannot read {}", m.display()))?;
                    let dir = m.parent().unwrap_or(Path::new("."));
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(|l| dir.join(l))
                        .collect()
                }
                (None, None) => unreachable!("clap requires one of them"),
            };
            let mut verdicts = Vec::new();
            for p in &paths {
                verdicts.push(run_one(p, &overrides)?);
            }
            Ok(exit(Verdict::combine(verdicts)))
        }
        Command::Report { path, out } => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let report = Report::from_json(&text)?;
            print!("{}", report.summary());
            if let Some(dir) = out {
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("report");
                let (_, table) = report.write(&dir, stem)?;
                println!("  wrote {}", table.display());
            }
            Ok(exit(report.verdict))
        }
        Command::Oracle { seed } => {
            let checks = run_oracle_suite(seed)?;
            for c in &checks {
                println!(
                    "{} {:<40} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            Ok(exit(Verdict::combine(
                checks.iter().map(|c| Verdict::from_bool(c.passed)),
            )))
        }
        Command::Selftest { seed, out } => {
            let mut worst = Verdict::Pass;
            for cfg in selftest::configs(seed) {
                let report = experiments::run(&cfg, Path::new("."), false);
                report.write(&out, &cfg.stem())?;
                print!("{}", report.summary());
                if matches!(report.verdict, Verdict::Fail | Verdict::Inconclusive) {
                    worst = Verdict::combine([worst, report.verdict]);
                }
            }
            Ok(exit(worst))
        }
    }
}
