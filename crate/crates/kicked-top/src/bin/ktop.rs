use std::process::ExitCode;

fn main() -> ExitCode {
    match kicked_top::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ktop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
