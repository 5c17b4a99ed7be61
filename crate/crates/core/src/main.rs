use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(mixsec::cli::main() as u8)
}
