use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(xacml_coverage::cli::run() as u8)
}
