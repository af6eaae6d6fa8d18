//! `qsonn gradcheck`: run the finite-difference verification suite.
//! Exits 2 when any configuration exceeds the tolerance.

use anyhow::Result;
use qsonn::training::grad_check_suite;
use std::process::ExitCode;

#[derive(clap::Args)]
pub struct Args {
    /// Largest power-series order to verify [default: 4]
    #[arg(long, default_value_t = 4)]
    pub q_max: usize,
    /// Worst accepted relative error [default: 1e-4]
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Seed for the random layers [default: 7]
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let cases = grad_check_suite(args.q_max, args.seed);
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    println!("{:<32} {:>14}", "configuration", "worst rel err");
    for case in &cases {
        let ok = case.worst_rel_err < args.tolerance;
        println!(
            "{:<32} {:>14.3e} {}",
            case.label(),
            case.worst_rel_err,
            if ok { "ok" } else { "FAIL" }
        );
        worst = worst.max(case.worst_rel_err);
        if !ok {
            failures += 1;
        }
    }
    println!(
        "worst relative error {worst:.3e} over {} configurations",
        cases.len()
    );
    if failures > 0 {
        eprintln!(
            "gradient check FAILED for {failures} configuration(s) at tolerance {:.1e}",
            args.tolerance
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
