use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use switchsynth::config::{output_dir_override, JobConfig};
use switchsynth::{inspect, pipeline, tables, Error, EXIT_INFEASIBLE};

/// Finite-state abstraction and switching synthesis for binary-sensed
/// planar plants.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run abstract -> gain -> synthesize -> simulate for every n in a config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute both example tables and compare with the published values.
    ReproduceTables,
    /// Print a machine, certificate, result or summary artifact.
    Inspect { path: PathBuf },
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Pipeline { config } => {
            let cfg = JobConfig::load(&config)?;
            let out = cfg.resolve_output_dir();
            let report = pipeline::run_pipeline(&cfg, &out)?;
            print!("{}", pipeline::render_summary(&report.summary));
            println!("artifacts in {}", out.display());
            if report.all_feasible {
                Ok(0)
            } else {
                eprintln!("synthesis infeasible for some n; refine the partition");
                Ok(EXIT_INFEASIBLE)
            }
        }
        Cmd::ReproduceTables => {
            let mut checks = tables::check_table(&tables::TABLE_II)?;
            checks.extend(tables::check_table(&tables::TABLE_III)?);
            let text = tables::render(&checks);
            print!("{text}");
            if let Some(dir) = output_dir_override() {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                let path = dir.join("tables.txt");
                std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
            }
            Ok(0)
        }
        Cmd::Inspect { path } => {
            print!("{}", inspect::render(&inspect::load(&path)?)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
