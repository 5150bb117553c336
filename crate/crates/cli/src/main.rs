use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use cocycle_lab_cli::args::{Cli, Command};
use cocycle_lab_cli::commands::{self, Rendered};

const USAGE_ERROR: u8 = 2;
const GATE_FAILURE: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    }

    let rendered = match dispatch(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };

    let written = match &cli.output {
        Some(path) => std::fs::write(path, &rendered.text),
        None => std::io::stdout().write_all(rendered.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(USAGE_ERROR);
    }

    match rendered.gate {
        Some(false) => ExitCode::from(GATE_FAILURE),
        _ => ExitCode::SUCCESS,
    }
}

fn dispatch(command: &Command) -> cocycle_lab::Result<Rendered> {
    match command {
        Command::Exponent(args) => commands::exponent(args),
        Command::Holder(args) => commands::holder(args),
        Command::VerifySwap(args) => commands::verify_swap(args),
        Command::Regions(args) => commands::regions(args),
        Command::Kac(args) => commands::kac(args),
        Command::Bunching(args) => commands::bunching(args),
        Command::Repro => Ok(commands::repro()),
    }
}
