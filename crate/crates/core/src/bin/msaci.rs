//! Command-line driver.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msaci::config::ExperimentConfig;
use msaci::experiment::{
    check_trace, parse_trace, run_experiment, run_synthetic, tune_on_frame, write_outputs,
    RunOutcome,
};
use msaci::synth::Generator;
use msaci::timeseries::load_csv;
use msaci::{Error, Result};

#[derive(Parser)]
#[command(name = "msaci", version, about = "Multi-step adaptive conformal load forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the online experiment on the configured dataset.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the online experiment on a generated series.
    Synth {
        #[arg(long)]
        generator: String,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the bound report from a trace file.
    Check {
        #[arg(long)]
        trace: PathBuf,
        /// Take targets and learning rates from this config instead of
        /// inferring them from the trace.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Select the ridge parameter on the training rows.
    Tune {
        #[arg(long)]
        config: PathBuf,
    },
}

fn output_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> Option<PathBuf> {
    out.or_else(|| cfg.output.dir.clone())
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn finish(outcome: &RunOutcome, dir: Option<&Path>) -> Result<()> {
    let mut text = outcome.summary().to_text();
    text.push_str(&format!("ridge a = {}\n{}", outcome.ridge, outcome.report));
    if let Some(dir) = dir {
        write_outputs(outcome, dir)?;
        text.push_str(&format!("outputs written to {}\n", dir.display()));
    }
    emit(&text);
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = run_experiment(&cfg)?;
            finish(&outcome, output_dir(&cfg, out).as_deref())
        }
        Command::Synth {
            generator,
            steps,
            seed,
            config,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let generator: Generator = generator.parse()?;
            let steps = steps.unwrap_or(cfg.synthetic.steps);
            let seed = seed.unwrap_or(cfg.synthetic.seed);
            let outcome = run_synthetic(&cfg, generator, steps, seed)?;
            finish(&outcome, output_dir(&cfg, out).as_deref())
        }
        Command::Check { trace, config } => {
            let text = std::fs::read_to_string(&trace)?;
            let rows = parse_trace(&text)?;
            let known = match config {
                Some(path) => Some(ExperimentConfig::load(path)?.aci_config()),
                None => None,
            };
            let report = check_trace(&rows, known.as_ref())?;
            emit(&report.to_string());
            Ok(())
        }
        Command::Tune { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let data = cfg
                .data
                .as_ref()
                .ok_or_else(|| Error::Config("missing [data] section".into()))?;
            let frame = load_csv(&data.path, &data.schema)?;
            emit(&format!("{}\n", tune_on_frame(&frame, &cfg)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
