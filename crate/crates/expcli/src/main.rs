use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slowbond_cli::analyze::{analyze, default_report_dir, write_report, Analysis, AnalyzeOptions};
use slowbond_cli::config::{parse_seed, ExperimentConfig};
use slowbond_cli::runner::{default_workers, run};
use slowbond_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "slowbond", version, about = "Slow bond and reinforced last passage experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (n, replica) cell of a config (TOML, or a previous run's manifest.json).
    Run {
        config: PathBuf,
        /// Overrides the config seed and SLOWBOND_SEED (decimal or 0x hex).
        #[arg(long)]
        seed: Option<String>,
        /// Worker threads; defaults to the available hardware parallelism.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory; overrides the config and SLOWBOND_OUTPUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive a report from one or more run directories of the same model.
    Analyze {
        analysis: Analysis,
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
        /// Finite-size correction exponent for time_constant.
        #[arg(long)]
        correction: Option<f64>,
        /// System size for tails (default: largest).
        #[arg(long)]
        n: Option<u64>,
        /// Observable column to analyze (default depends on model and analysis).
        #[arg(long)]
        observable: Option<String>,
        #[arg(long, default_value_t = 0)]
        bootstrap_seed: u64,
        /// Report directory (default: <first run dir>/analysis).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            seed,
            workers,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply_env(|k| std::env::var(k).ok())?;
            if let Some(s) = seed {
                cfg.seed = parse_seed(&s).map_err(|e| CliError::invalid(format!("--seed: {e}")))?;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if workers == Some(0) {
                return Err(CliError::invalid("--workers: must be at least 1"));
            }
            let outcome = run(&cfg, workers.unwrap_or_else(default_workers))?;
            eprintln!(
                "{}: {} cells, {} records -> {}",
                cfg.model,
                outcome.cells.len(),
                outcome.records.len(),
                outcome.dir.display()
            );
            Ok(())
        }
        Command::Analyze {
            analysis,
            run_dirs,
            correction,
            n,
            observable,
            bootstrap_seed,
            out,
        } => {
            let opts = AnalyzeOptions {
                correction,
                n,
                observable,
                bootstrap_seed,
                out: out.clone(),
            };
            let report = analyze(&run_dirs, analysis, &opts)?;
            let dir = out.unwrap_or_else(|| default_report_dir(&run_dirs));
            let (json, plot) = write_report(&report, &dir)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?
            );
            eprintln!("wrote {} and {}", json.display(), plot.display());
            Ok(())
        }
    }
}
