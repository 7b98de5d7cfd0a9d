//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//! Exits nonzero if any criterion fails.

use std::process::ExitCode;

use proxcg::harness::acceptance::run_all;

fn main() -> ExitCode {
    let results = run_all();
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
