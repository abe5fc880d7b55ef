use std::process::ExitCode;

fn main() -> ExitCode {
    beliefspace::cli::main_entry(std::env::args_os())
}
