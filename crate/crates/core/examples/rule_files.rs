//! Rule files: certificates, full tables and single-entry edits.

use rnca::analysis::decompose;
use rnca::rulefile::{load_rule, save_certificate, save_rule_table};
use rnca::{canonical_rule, FlowSpec};

fn main() {
    let cert = save_certificate("beta=1", &FlowSpec::canonical(1), 0);
    print!("{cert}");
    let rule = load_rule(&cert).unwrap();
    assert_eq!(rule, canonical_rule(1, 0).unwrap());

    let table = save_rule_table(&rule);
    println!("full table: {} lines", table.lines().count());

    let edited = format!("{cert}f: 0 4 4 0 0 3\n");
    let verdict = decompose(&load_rule(&edited).unwrap());
    println!("with one entry changed: {}", verdict.violation().unwrap());
}
