use std::io;
use std::process::ExitCode;

use clap::Parser;
use radical::cli::{main_with, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = main_with(&cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}
