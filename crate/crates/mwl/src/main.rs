use std::process::ExitCode;

fn main() -> ExitCode {
    let code = mwl::cli::run(std::env::args());
    ExitCode::from(code as u8)
}
