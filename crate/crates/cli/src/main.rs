mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};
use manifest::Files;

/// Reads `ED_ALIGN_THREADS`; unset or 0 leaves the pool size to rayon.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("ED_ALIGN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("ED_ALIGN_THREADS must be a count, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn run(command: &Command, argv: &[String]) -> CliResult<()> {
    configure_threads()?;
    let mut files = Files::default();
    let (manifest, primary) = match command {
        Command::Simplify(a) => {
            commands::simplify(a, &mut files)?;
            (a.manifest.as_deref(), Some(a.out.as_path()))
        }
        Command::Coarsen(a) => {
            commands::coarsen(a, &mut files)?;
            (a.manifest.as_deref(), a.out.as_deref())
        }
        Command::Bind(a) => {
            commands::bind(a, &mut files)?;
            (a.manifest.as_deref(), a.out.as_deref())
        }
        Command::Deform(a) => {
            commands::deform(a, &mut files)?;
            (a.manifest.as_deref(), a.out.as_deref().or(a.emit_identity.as_deref()))
        }
        Command::Register(a) => {
            commands::register_cmd(a, &mut files)?;
            (a.manifest.as_deref(), Some(a.out.as_path()))
        }
        Command::Mmd(a) => {
            commands::mmd_cmd(a, &mut files)?;
            (a.manifest.as_deref(), None)
        }
        Command::EiaeDemo(a) => {
            commands::eiae_demo(a, &mut files)?;
            (a.manifest.as_deref(), Some(a.out.as_path()))
        }
    };
    files.finish(command, argv, manifest, primary)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli.command, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
