//! The three non-trivial five-state rules, built from their flow certificates.

use rnca::{build_rule, canonical_rule, mirror_rule, FlowSpec, Neighborhood};

fn main() {
    for beta in [-1, 0, 1] {
        let rule = canonical_rule(beta, 0).unwrap();
        let flow = FlowSpec::canonical(beta);
        println!("{rule}");
        println!("  g entries {:?}", flow.direct_entries());
        println!("  T entries {:?}", flow.triple_entries());
        println!("  rotation symmetric: {}", rule.is_rotation_symmetric());
        let lone_four = rule.apply_local(Neighborhood::new(4, 0, 0, 0, 0)).unwrap();
        let beside_four = rule.apply_local(Neighborhood::new(0, 4, 0, 0, 0)).unwrap();
        println!("  f(4,0,0,0,0) = {lone_four}, f(0,4,0,0,0) = {beside_four}");
    }

    // The mirror image swaps left and right neighbors and flips beta.
    let b1 = canonical_rule(1, 0).unwrap();
    assert_eq!(mirror_rule(&b1), canonical_rule(-1, 0).unwrap());
    println!("mirror(beta=1) = beta=-1");

    // A rule built from a flow remembers it.
    let rebuilt = build_rule(&FlowSpec::canonical(0), 2).unwrap();
    println!("{rebuilt}, provenance kept: {}", rebuilt.provenance().is_some());
}
