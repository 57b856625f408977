use std::process::ExitCode;

use aiaforge_cli::{parse_args, run};

fn main() -> ExitCode {
    match parse_args(std::env::args_os()) {
        Ok(cli) => ExitCode::from(run(cli) as u8),
        Err(e) => {
            let _ = e.print();
            ExitCode::from(if e.use_stderr() { 2 } else { 0 })
        }
    }
}
