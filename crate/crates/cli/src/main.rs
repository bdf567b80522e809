mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Everything that can stop a command.
#[derive(Debug)]
pub enum Failure {
    /// Missing or contradictory arguments.
    Usage(String),
    Run(sweepconf::Error),
}

impl From<sweepconf::Error> for Failure {
    fn from(e: sweepconf::Error) -> Self {
        Failure::Run(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use sweepconf::Error as E;
        match self {
            Failure::Usage(_) | Failure::Run(E::Config(_) | E::Calibration(_)) => 2,
            Failure::Run(_) => 1,
        }
    }

    fn message(&self) -> String {
        let msg = match self {
            Failure::Usage(m) => m.clone(),
            Failure::Run(e) => e.to_string(),
        };
        msg.split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    let file = config::FileConfig::load(cli.config.as_deref())?;
    let json = cli.json;
    match cli.command {
        Command::Pipeline(a) => commands::pipeline(a, &file, json),
        Command::Match(a) => commands::match_cmd(a, &file, json),
        Command::Sweep(a) => commands::sweep(a, &file, json),
        Command::Weight(a) => commands::weight(a, json),
        Command::Depth(a) => commands::depth(a, json),
        Command::Loss(a) => commands::loss(a, json),
        Command::Eval(a) => commands::eval(a, json),
        Command::Synth(a) => commands::synth(a, json),
        Command::Profile(a) => commands::profile(a, json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
