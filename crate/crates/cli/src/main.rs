mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::{Settings, UsageError};

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<std::io::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<conceptvec::Error>() {
            return if e.is_input_error() { 2 } else { 1 };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let settings = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    match cli.command {
        Command::BuildVocab(a) => commands::build_vocab(a, &settings),
        Command::Train(a) => commands::train(a, &settings),
        Command::BuildBoc(a) => commands::build_boc(a, &settings),
        Command::Densify(a) => commands::densify(a, &settings),
        Command::Sim(a) => commands::sim(a, &settings),
        Command::EvalRelatedness(a) => commands::eval_relatedness(a, &settings),
        Command::EvalDataless(a) => commands::eval_dataless(a, &settings),
        Command::Synth(a) => commands::synth(a, &settings),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONCEPTVEC_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
