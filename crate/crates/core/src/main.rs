use std::process::ExitCode;

fn main() -> ExitCode {
    frobwitt::cli::main_with_args(std::env::args_os())
}
