use std::process::ExitCode;

fn main() -> ExitCode {
    docent::cli::main_with(std::env::args_os())
}
