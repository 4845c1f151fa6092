use std::process::ExitCode;

use clap::Parser;
use qconv_cli::RunConfig;

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match qconv_cli::execute(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qconv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
