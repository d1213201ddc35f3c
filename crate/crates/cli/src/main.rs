use std::process::ExitCode;

use clap::Parser;
use zentropy_cli::{run, Cli, Outcome, OUT_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_out = std::env::var_os(OUT_ENV);
    match run(&cli, env_out.as_ref()) {
        Ok(Outcome::Report(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Wrote(summary)) => {
            println!(
                "wrote {} files to {}",
                summary.files.len(),
                summary.dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("zentropy: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
