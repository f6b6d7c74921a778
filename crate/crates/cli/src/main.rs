use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match reman_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage mistakes count as configuration errors; help and version are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match reman_cli::run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("reman: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
