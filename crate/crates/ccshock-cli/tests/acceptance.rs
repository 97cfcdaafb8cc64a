//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Tolerances and time budgets live in `ccshock_cli::verify`.

use std::process::ExitCode;

use ccshock_cli::verify;

const SEED: u64 = 20_240_601;

fn main() -> ExitCode {
    let mut failed = 0;
    for c in verify::criteria() {
        let o = c.run(SEED);
        println!("{o}");
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", verify::criteria().len() - failed, verify::criteria().len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
