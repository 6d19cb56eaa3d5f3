use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use superradiant::output::error_json;
use superradiant::{read_config, run, Error, Mode, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Steady,
    Spectrum,
    Sweep,
    Scaling,
    OracleCheck,
    Fig5,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Steady => Mode::Steady,
            ModeArg::Spectrum => Mode::Spectrum,
            ModeArg::Sweep => Mode::Sweep,
            ModeArg::Scaling => Mode::Scaling,
            ModeArg::OracleCheck => Mode::OracleCheck,
            ModeArg::Fig5 => Mode::Fig5,
        }
    }
}

/// Superradiant laser steady states, spectra and sweeps.
#[derive(Debug, Parser)]
#[command(name = "srlaser", version)]
struct Cli {
    mode: ModeArg,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("{}", error_json(err));
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let options = RunOptions {
        mode: cli.mode.into(),
        out_dir: cli.out,
        jobs: cli.jobs.map(|j| j as usize),
    };
    match read_config(&cli.config).and_then(|c| run(&c, &options)) {
        Ok(outcome) => {
            println!("{}", outcome.csv_path.display());
            println!("{}", outcome.json_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
