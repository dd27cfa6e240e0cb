mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit status: 0 success, 1 input (IO, parse, usage) errors, 2 statistical
/// errors such as a regime violation.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<hdlrt::Error>()) {
        Some(e) if !e.is_input_error() => 2,
        _ => 1,
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    log::info!("resolved arguments: {cli:?}");
    match &cli.command {
        Command::Test(a) => commands::test(cli, a),
        Command::Multisplit(a) => commands::multisplit(cli, a),
        Command::Simulate(a) => commands::simulate(cli, a),
        Command::Power(a) => commands::power(cli, a),
        Command::Boundary(a) => commands::boundary(cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let argv = match config::merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
