use std::process::ExitCode;

fn main() -> ExitCode {
    nesy_harness::cli::main_with(std::env::args_os())
}
