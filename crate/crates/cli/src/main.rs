use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (outcome, format) = stabset_cli::run_args(std::env::args_os());
    let text = stabset_cli::format_report(&outcome, format);
    // a closed pipe (e.g. `| head`) is not an error of the run itself
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(outcome.code as u8)
}
