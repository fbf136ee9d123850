use std::process::ExitCode;

fn main() -> ExitCode {
    stein::cli::run()
}
