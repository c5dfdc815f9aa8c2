//! ecsim: pseudospectral electroconvection simulation and diagnostics.
//!
//! Exit codes: 0 all checks passed, 1 diagnostic failure, 2 bad
//! configuration, 3 numerical blow-up.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use electroconvection::app;
use electroconvection::config::parse_config;
use electroconvection::error::Error;
use electroconvection::report::Status;

#[derive(Parser)]
#[command(
    name = "ecsim",
    version,
    about = "Darcy-law electroconvection laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long, env = "ECSIM_CONFIG")]
    config: PathBuf,
    /// Output directory for run artifacts.
    #[arg(long, env = "ECSIM_OUT")]
    out: PathBuf,
    /// Override the config's random seed.
    #[arg(long, env = "ECSIM_SEED")]
    seed: Option<u64>,
    /// Force strict padded dealiasing.
    #[arg(long, env = "ECSIM_STRICT_DEALIAS", default_value_t = false)]
    strict_dealias: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and evaluate its diagnostics.
    Run(CommonArgs),
    /// Picard/Duhamel mild-solution iteration and smallness scan.
    Picard(CommonArgs),
    /// Grid of runs over declared parameter lists.
    Sweep {
        #[arg(long, env = "ECSIM_CONFIG")]
        config: PathBuf,
        #[arg(long, env = "ECSIM_OUT")]
        out: PathBuf,
        /// Concurrent worker count.
        #[arg(long, env = "ECSIM_WORKERS", default_value_t = 4)]
        workers: usize,
    },
    /// Recompute diagnostics from stored snapshots.
    Analyze {
        /// Run directories produced by `run`.
        dirs: Vec<PathBuf>,
    },
    /// Built-in closed-form and invariant checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "exit_code": code })
            );
            ExitCode::from(code as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = parse_config(&std::fs::read_to_string(&args.config)?)?;
            app::apply_overrides(&mut cfg, args.seed, args.strict_dealias);
            let report = app::cmd_run(&cfg, &args.out)?;
            for entry in &report.entries {
                let status = match entry.status {
                    Status::Pass => "pass",
                    Status::Flag => "flag",
                    Status::Fail => "FAIL",
                };
                println!("{status}  {}  {:?}", entry.name, entry.observed);
            }
            println!("artifacts written to {}", args.out.display());
            Ok(if report.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Picard(args) => {
            let mut cfg = parse_config(&std::fs::read_to_string(&args.config)?)?;
            app::apply_overrides(&mut cfg, args.seed, args.strict_dealias);
            let summary = app::cmd_picard(&cfg, &args.out)?;
            println!(
                "picard: converged = {}, contracted = {}, iterations = {}",
                summary.converged,
                summary.contracted,
                summary.ep_norms.len()
            );
            for row in &summary.scan {
                println!(
                    "scale {:>10.3e}  contracted = {:5}  max r = {:.4}  E_p = {:.6e}",
                    row.scale, row.contracted, row.max_contraction_factor, row.ep_norm
                );
            }
            if let Some(expo) = summary.cubic_exponent {
                println!("bilinear probe exponent: {expo:.4}");
            }
            println!("artifacts written to {}", args.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            out,
            workers,
        } => {
            let sweep = app::parse_sweep_config(&std::fs::read_to_string(&config)?)?;
            let rows = app::cmd_sweep(&sweep, &out, workers)?;
            for row in &rows {
                println!(
                    "{}  n={} alpha={} eps={} scale={} seed={}  {}  l2={:.6e}",
                    row.dir,
                    row.n,
                    row.alpha,
                    row.epsilon,
                    row.scale,
                    row.seed,
                    row.status,
                    row.final_l2
                );
            }
            println!("summary written to {}", out.join("summary.csv").display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { dirs } => {
            if dirs.is_empty() {
                return Err(Error::Config(
                    "analyze needs at least one run directory".into(),
                ));
            }
            let outcomes = app::cmd_analyze(&dirs)?;
            let mut all_reproduced = true;
            for o in &outcomes {
                println!(
                    "{}  {}",
                    if o.reproduced {
                        "reproduced"
                    } else {
                        "MISMATCH"
                    },
                    o.dir.display()
                );
                all_reproduced &= o.reproduced;
            }
            Ok(if all_reproduced {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Selftest => {
            let outcomes = electroconvection::selftest::run_all();
            let mut failures = 0;
            for o in &outcomes {
                if o.passed {
                    println!("pass  {}", o.name);
                } else {
                    failures += 1;
                    println!("FAIL  {}  {}", o.name, o.detail);
                }
            }
            println!("{} checks, {} failures", outcomes.len(), failures);
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
