use std::process::ExitCode;

use clap::Parser;
use luroth_cli::{exit_code, render, Cli, EXIT_INTERNAL};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match render(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("luroth: {e:#}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("luroth: cannot write output: {e}");
        return ExitCode::from(EXIT_INTERNAL as u8);
    }
    ExitCode::SUCCESS
}
