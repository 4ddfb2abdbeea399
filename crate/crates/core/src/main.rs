use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use htlab::cli::{error_exit_code, run, ExperimentConfig, ExperimentKind};

/// Honest-time experiments: figures, maximum laws, hedging and validation.
#[derive(Parser)]
#[command(name = "htlab", version)]
struct Args {
    /// Experiment to run.
    experiment: ExperimentKind,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = ExperimentConfig::load(&args.config).and_then(|mut cfg| {
        if cfg.experiment.is_some_and(|k| k != args.experiment) {
            eprintln!(
                "note: config names experiment {:?}, running {} as requested",
                cfg.experiment.map(|k| k.name()).unwrap_or_default(),
                args.experiment.name()
            );
        }
        cfg.experiment = Some(args.experiment);
        if let Some(s) = args.seed {
            cfg.mc.seed = s;
        }
        if let Some(o) = args.out {
            cfg.output_dir = Some(o);
        }
        run(&cfg)
    });
    match result {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            for line in &outcome.lines {
                if writeln!(stdout, "{line}").is_err() {
                    break;
                }
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("htlab: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
