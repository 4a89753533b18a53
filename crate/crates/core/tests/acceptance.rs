//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use couette_core::experiments::{run_criterion, SuiteConfig, CRITERIA};

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let mut failed = Vec::new();
    for (id, name) in CRITERIA {
        let start = Instant::now();
        match run_criterion(id, &cfg) {
            Ok(r) => {
                let tag = if r.pass { "PASS" } else { "FAIL" };
                println!("{tag} [{id:>2}] {name}: {} ({:.1}s)", r.summary, start.elapsed().as_secs_f64());
                if !r.pass {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("FAIL [{id:>2}] {name}: error: {e}");
                failed.push(id);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", CRITERIA.len() - failed.len(), CRITERIA.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {failed:?}");
        ExitCode::FAILURE
    }
}
