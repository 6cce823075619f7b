mod args;
mod commands;
mod input;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Common};
use input::Failure;

fn init_threads(common: &Common) -> Result<(), Failure> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QMS_LOG")).init();
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Validate(c) | Command::Constants(c) | Command::Suite(c) => c,
        Command::W2 { common, .. } => common,
    };
    let outcome = init_threads(common).and_then(|()| match &cli.command {
        Command::Validate(c) => commands::validate(c),
        Command::Constants(c) => commands::constants(c),
        Command::Suite(c) => commands::suite(c),
        Command::W2 { common, from, to } => commands::w2(common, from, to),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
