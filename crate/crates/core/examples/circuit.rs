//! Compiling a netlist to a pattern and evaluating it by simulation.

use rnca::canonical_rule;
use rnca::circuit::{compile, evaluate_all, lower_netlist, parse_netlist};
use rnca::widgets::Catalog;

const NETLIST: &str = "\
input A
input B
input C
gate x = AND A B
gate y = NOT C
gate o = OR x y
output O = o
";

fn main() {
    let rule = canonical_rule(1, 0).unwrap();
    let net = parse_netlist(NETLIST).unwrap();
    println!("lowered:\n{}", lower_netlist(&net));

    let circuit = compile(&net, &Catalog::standard(), &rule).unwrap();
    let frame = circuit.pattern.frame();
    println!("{}x{} cells, constants {:?}, outputs {:?}", frame.width(), frame.height(), circuit.constants, circuit.outputs);
    for g in &circuit.gates {
        println!("  gate {} operands arrive at {} and {}", g.name, g.a_arrival, g.b_arrival);
    }
    for (inputs, outputs) in evaluate_all(&rule, &circuit) {
        let want = net.evaluate(&inputs).unwrap();
        let got = outputs.unwrap();
        println!("  {inputs:?} -> {got:?} {}", if got == want { "ok" } else { "WRONG" });
    }

    let crossing = parse_netlist("input A\ninput B\ngate x = ANDNOT A B\ngate y = ANDNOT B A\noutput P = x\noutput Q = y").unwrap();
    println!("crossing: {}", compile(&crossing, &Catalog::standard(), &rule).unwrap_err());
}
