use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    ExitCode::from(rose_dynamics::cli::run(&argv, &mut out) as u8)
}
