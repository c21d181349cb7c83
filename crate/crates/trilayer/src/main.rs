use std::process::ExitCode;

use clap::Parser;
use trilayer::cli::{run, Cli};
use trilayer::error::{CliError, EXIT_INVALID};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful runs; anything else
            // is a usage error and shares the validation exit code.
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Invalid(ce) => {
                    eprintln!("error: invalid configuration");
                    for v in &ce.violations {
                        eprintln!("  {v}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
