use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sublap::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = execute(&cli);
    if let Some(msg) = out.report["error"]["message"].as_str() {
        eprintln!("error: {msg}");
    }
    let text = serde_json::to_string_pretty(&out.report).expect("report serializes");
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{text}");
    ExitCode::from(out.exit_code as u8)
}
