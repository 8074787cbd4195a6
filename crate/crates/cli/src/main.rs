use std::process::ExitCode;

use clap::Parser;
use ricci_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = execute(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
