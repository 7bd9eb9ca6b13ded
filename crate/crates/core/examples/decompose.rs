//! Recovering the flow certificate of a rule, or the reason there is none.

use rnca::analysis::{decompose, Verdict};
use rnca::{canonical_rule, Neighborhood};

fn main() {
    let rule = canonical_rule(1, 0).unwrap();
    match decompose(&rule).verdict {
        Verdict::Ncca(flow) => println!("beta=1 is number-conserving; g = {:?}, T = {:?}", flow.direct_entries(), flow.triple_entries()),
        Verdict::NotNcca(v) => println!("unexpected: {v}"),
    }

    // Changing single entries breaks the certificate in different ways.
    let edits = [Neighborhood::new(0, 4, 0, 0, 0), Neighborhood::new(4, 4, 4, 4, 4), Neighborhood::new(1, 0, 4, 0, 4)];
    for t in edits {
        let old = rule.apply_local(t).unwrap();
        let perturbed = rule.with_entry(t, (old + 1) % 5).unwrap();
        let result = decompose(&perturbed);
        println!("f{t}: {old} -> {}: {}", (old + 1) % 5, result.violation().map_or("still NCCA".into(), |v| v.to_string()));
    }
}
