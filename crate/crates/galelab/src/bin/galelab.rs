use std::process::ExitCode;

fn main() -> ExitCode {
    galelab::cli::run()
}
