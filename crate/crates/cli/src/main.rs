use std::process::ExitCode;
use std::thread;

/// Deeply nested programs recurse deeply in the checker and rewriter.
const STACK_BYTES: usize = 512 * 1024 * 1024;

fn main() -> ExitCode {
    let worker = thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(|| calf_cli::main_with_args(std::env::args_os()))
        .expect("spawn worker thread");
    match worker.join() {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(_) => ExitCode::from(calf_cli::ExitStatus::Failure.code() as u8),
    }
}
