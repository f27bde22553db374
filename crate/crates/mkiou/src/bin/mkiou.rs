use std::process::ExitCode;

fn main() -> ExitCode {
    mkiou::cli::run()
}
