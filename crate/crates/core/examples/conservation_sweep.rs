//! Brute-force conservation check: every 3x3 window content, one step each.

use rnca::analysis::{check_conservation_window, SweepMode};
use rnca::{canonical_rule, Neighborhood};

fn main() {
    for beta in [-1, 0, 1] {
        let rule = canonical_rule(beta, 0).unwrap();
        let report = check_conservation_window(&rule, 3, 3, SweepMode::exhaustive()).unwrap();
        println!("beta={beta}: {} checked, {} violations", report.checked, report.violation_count);
    }

    let rule = canonical_rule(1, 0).unwrap();
    let broken = rule.with_entry(Neighborhood::new(0, 4, 4, 0, 0), 1).unwrap();
    let report = check_conservation_window(&broken, 3, 3, SweepMode::Sampled { count: 20_000, seed: 11 }).unwrap();
    println!("perturbed, sampled: {} of {} window contents change the sum", report.violation_count, report.checked);
    if let Some(v) = report.violations.first() {
        println!("  e.g. sum {} -> {} for {:?}", v.sum_before, v.sum_after, v.config.cells().collect::<Vec<_>>());
    }
}
