use std::process::ExitCode;

fn main() -> ExitCode {
    let report = canon_cli::run(std::env::args_os());
    print!("{report}");
    ExitCode::from(report.exit_code())
}
