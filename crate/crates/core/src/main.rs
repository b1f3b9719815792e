use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use svarsoft::config::{Mode, RunConfig};
use svarsoft::data::save_dataset;
use svarsoft::error::EXIT_INPUT;
use svarsoft::output::{error_json, write_error_record};
use svarsoft::run::{cli_path, run, synthetic_oil_dataset};
use svarsoft::samplers::SamplerKind;
use svarsoft::SvarError;

#[derive(Parser)]
#[command(name = "svarsoft", version, about = "Posterior sampling for sign-restricted SVARs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        sampler: Option<SamplerKind>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic three-variable oil-market dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 540)]
        periods: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn configure_threads() -> Result<(), SvarError> {
    if let Ok(v) = std::env::var("SVARSOFT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| SvarError::Config(format!("SVARSOFT_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| SvarError::Config(e.to_string()))?;
    }
    Ok(())
}

fn fail(error: &SvarError, out: Option<&PathBuf>) -> ExitCode {
    let code = error.exit_code();
    eprintln!("{}", error_json(error, code));
    if let Some(dir) = out {
        if let Err(e) = write_error_record(dir, error, code) {
            eprintln!("could not write error record in {}: {e}", dir.display());
        }
    }
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            sampler,
            delta,
            mode,
            out,
        } => {
            let out = out.map(|p| cli_path(&p));
            let mut cfg = match RunConfig::load(&config) {
                Ok(cfg) => cfg,
                Err(e) => return fail(&e, out.as_ref()),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(s) = sampler {
                cfg.sampler = s;
            }
            if let Some(d) = delta {
                cfg.delta = d;
            }
            if let Some(m) = mode {
                cfg.mode = m;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if let Err(e) = configure_threads() {
                return fail(&e, Some(&cfg.out));
            }
            match run(&cfg) {
                Ok(report) => {
                    for f in &report.files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e, Some(&cfg.out)),
            }
        }
        Command::Synth { out, periods, seed } => {
            if periods < 3 {
                let e = SvarError::Config("synth needs at least 3 periods".into());
                eprintln!("{}", error_json(&e, EXIT_INPUT));
                return ExitCode::from(EXIT_INPUT as u8);
            }
            match save_dataset(&synthetic_oil_dataset(periods, seed), &out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e, None),
            }
        }
    }
}
