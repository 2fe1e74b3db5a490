use neurframe_core::run_selfcheck;

use crate::CliError;

pub fn run() -> Result<(), CliError> {
    let reports = run_selfcheck();
    let total = reports.len();
    let mut failed = 0;
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {}: {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::Selfcheck { failed, total });
    }
    println!("all {total} checks passed");
    Ok(())
}
