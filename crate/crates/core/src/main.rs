use std::process::ExitCode;

use clap::Parser;
use unitary_weil::cli::{self, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let report = cli::run(&config);
    let json = match report.to_json() {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = std::fs::write(&config.out, json + "\n") {
        eprintln!("error: cannot write {}: {e}", config.out.display());
        return ExitCode::from(2);
    }
    for suite in &report.suites {
        println!("{:<22} {:?}", suite.name, suite.status);
        for w in suite.counterexamples.iter().take(3) {
            println!("    {w}");
        }
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
