use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sphereball::Domain;
use verify::config::Config;
use verify::corpus::corpus;
use verify::report::{emit_report, exit_code, Format};
use verify::suites::{suite_ids, DEFAULT_SEED};
use verify::{run_suites, RunOptions, VerifyError, SUITES};

#[derive(Parser)]
#[command(name = "verify", version, about = "Numerical checks for sphere and ball approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite or `all` and write the report.
    Run {
        #[arg(long)]
        suite: String,
        /// TOML settings; every suite falls back to its defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Report `elapsed_ms = 0` for byte-identical output.
        #[arg(long)]
        stable: bool,
    },
    /// List the suites.
    List,
    /// List the corpus functions.
    Corpus,
}

fn run(cli: Cli) -> Result<i32, VerifyError> {
    match cli.command {
        Command::List => {
            for s in &SUITES {
                println!("{:<20} {}", s.id, s.statement);
            }
            Ok(0)
        }
        Command::Corpus => {
            for dom in [Domain::Sphere(3), Domain::Ball(1), Domain::Ball(2)] {
                for e in corpus(dom)? {
                    println!("{:<8} {:<10} {}", e.name, dom.to_string(), serde_json::to_string(&e.class).unwrap_or_default());
                }
            }
            Ok(0)
        }
        Command::Run { suite, config, out, format, seed, jobs, stable } => {
            let ids = suite_ids();
            let cfg = match &config {
                Some(path) => Config::load(path, &ids)?,
                None => Config::default(),
            };
            let opts = RunOptions {
                seed: seed.or(cfg.seed()).unwrap_or(DEFAULT_SEED),
                jobs,
                stable: stable || cfg.stable(),
            };
            let reports = run_suites(&suite, &cfg, &opts)?;
            emit_report(&reports, format, &out)?;
            for r in &reports {
                let failed = r.cases.iter().filter(|c| !c.pass).count();
                let verdict = if r.pass { "pass" } else { "FAIL" };
                eprintln!("{:<20} {verdict} ({} cases, {failed} failed, {} ms)", r.suite, r.cases.len(), r.elapsed_ms);
            }
            Ok(exit_code(&reports))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
