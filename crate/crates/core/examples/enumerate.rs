//! Classifying every rotation-symmetric number-conserving rule of an alphabet.

use rnca::analysis::{enumerate_rnca, verify_small_triviality};
use rnca::{FlowSpec, StateSet};

fn main() {
    for n in 1..=5 {
        let flows = enumerate_rnca(&StateSet::range(n)).unwrap();
        let nontrivial = flows.iter().filter(|f| !f.is_zero()).count();
        println!("{{0..{}}}: {} rules, {nontrivial} non-trivial", n - 1, flows.len());
    }
    let five = enumerate_rnca(&StateSet::range(5)).unwrap();
    for beta in [-1, 0, 1] {
        println!("  beta={beta} found: {}", five.contains(&FlowSpec::canonical(beta)));
    }

    let report = verify_small_triviality(6).unwrap();
    println!("{} normalized alphabets of at most four states in {{0..6}}, {} non-trivial", report.sets_checked, report.nontrivial.len());
}
