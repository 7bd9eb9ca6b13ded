//! Boolean circuits on the grid: a small netlist language, lowering to the
//! `AND` and `ANDNOT` gates, crossing-free placement with exactly
//! synchronized gate inputs, and evaluation by simulation.
//!
//! Each signal runs east on its own row; rows are stacked at a fixed pitch
//! and never cross. Gates take their operands from two adjacent rows, and
//! fan-out duplicates a row onto the level directly below. Arrival times
//! are balanced with detours and speed-1 track cells, so every gate sees
//! both inputs at the same step. Since a wire carries one signal only, a
//! compiled pattern evaluates a single assignment per run.

mod layout;
mod netlist;
mod plan;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

pub use netlist::{lower_netlist, parse_netlist, Gate, GateOp, Netlist};
pub use plan::SEARCH_BUDGET;

use crate::config::Cell;
use crate::rule::{canonical_rule, mirror_rule, Rule};
use crate::simulate::{SimError, Window};
use crate::widgets::{inject, Assignment, Catalog, Pattern, WidgetError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("line {line}: {reason}")]
    SyntaxError { line: usize, reason: String },
    #[error("line {line}: undefined name {name}")]
    UndefinedName { name: String, line: usize },
    #[error("line {line}: {name} is already defined")]
    DuplicateName { name: String, line: usize },
    #[error("{name} depends on itself")]
    CyclicDependency { name: String },
    #[error("not lowered: {0}")]
    NotLowered(String),
    #[error("routing infeasible: {0}")]
    RoutingInfeasible(String),
    #[error("delay unsatisfiable: {0}")]
    DelayUnsatisfiable(String),
    #[error("catalog incomplete: {0}")]
    CatalogIncomplete(String),
    #[error("no value given for input {0}")]
    MissingInput(String),
    #[error("unknown input {0}")]
    UnknownInput(String),
    #[error("output {output} detected at step {step}, scheduled for step {scheduled}")]
    UnexpectedArrival { output: String, step: u64, scheduled: u64 },
    #[error("layout bug: {0}")]
    Internal(String),
    #[error(transparent)]
    Widget(#[from] WidgetError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    /// Vertical distance between row levels; even, at least 24.
    pub pitch: u32,
    /// Most detours the exact delay search combines; larger mismatches are
    /// first reduced with deepest detours.
    pub max_detours: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { pitch: 24, max_detours: 64 }
    }
}

/// Where and when a gate's two operands arrive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateRecord {
    pub name: String,
    pub a_port: Cell,
    pub b_port: Cell,
    pub a_arrival: u64,
    pub b_arrival: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacedCircuit {
    /// Input ports are the netlist inputs plus one port per constant source;
    /// output ports carry their scheduled arrival steps as latencies.
    pub pattern: Pattern,
    pub inputs: Vec<String>,
    /// Ports injected with a signal in every run.
    pub constants: Vec<String>,
    pub injection_step: u64,
    /// Scheduled arrival step of each output.
    pub outputs: Vec<(String, u64)>,
    pub gates: Vec<GateRecord>,
}

const CONSTANT_NOTE: &str = "constant ";

impl PlacedCircuit {
    /// Rebuilds the schedule from a saved circuit pattern; constant ports
    /// are named in `constant <port>` notes.
    pub fn from_pattern(pattern: Pattern) -> PlacedCircuit {
        let constants: Vec<String> = pattern.notes.iter().filter_map(|n| n.strip_prefix(CONSTANT_NOTE)).map(str::to_string).collect();
        let inputs = pattern.inputs().map(|p| p.name.clone()).filter(|n| !constants.contains(n)).collect();
        let outputs = pattern.outputs().map(|p| (p.name.clone(), p.latency.unwrap_or(0))).collect();
        PlacedCircuit { pattern, inputs, constants, injection_step: 0, outputs, gates: vec![] }
    }

    /// Steps an evaluation runs: the last scheduled arrival plus a margin.
    pub fn horizon(&self) -> u64 {
        self.outputs.iter().map(|o| o.1).max().unwrap_or(0) + 40
    }
}

/// Places and routes a netlist (lowered first if needed) for `rule`, which
/// must be the catalog's rule or its mirror image.
pub fn compile(net: &Netlist, catalog: &Catalog, rule: &Rule) -> Result<PlacedCircuit, CompileError> {
    compile_with(net, catalog, rule, &CompileOptions::default())
}

pub fn compile_with(net: &Netlist, catalog: &Catalog, rule: &Rule, opts: &CompileOptions) -> Result<PlacedCircuit, CompileError> {
    let base = canonical_rule(catalog.beta, 0).map_err(|e| CompileError::CatalogIncomplete(e.to_string()))?;
    let same = |r: &Rule| r.quiescent() == rule.quiescent() && r.states() == rule.states() && r.index_table() == rule.index_table();
    let mirror = if same(&base) {
        false
    } else if same(&mirror_rule(&base)) {
        true
    } else {
        return Err(CompileError::CatalogIncomplete(format!("the catalog has no widgets for rule {}", rule.name())));
    };
    if !opts.pitch.is_multiple_of(2) || opts.pitch < 24 {
        return Err(CompileError::RoutingInfeasible(format!("pitch {} must be even and at least 24", opts.pitch)));
    }
    let lowered = lower_netlist(net);
    let resolved = plan::Resolved::new(&lowered)?;
    let planned = plan::plan(&resolved)?;
    let (planned, classes) = plan::fix_classes(&planned)?;
    let layout = layout::lay_out(&planned, &classes, &resolved.inputs, catalog, opts)?;
    let mut circuit = PlacedCircuit {
        pattern: layout.pattern,
        inputs: lowered.inputs.clone(),
        constants: layout.constants,
        injection_step: 0,
        outputs: lowered.outputs.iter().map(|(o, _)| (o.clone(), layout.outputs.iter().find(|x| &x.0 == o).expect("every output placed").1)).collect(),
        gates: layout.gates,
    };
    if mirror {
        circuit.pattern = circuit.pattern.mirrored();
        for g in &mut circuit.gates {
            g.a_port.x = -g.a_port.x;
            g.b_port.x = -g.b_port.x;
        }
    }
    Ok(circuit)
}

/// Runs one assignment and reads each output: true iff its signal arrives
/// exactly at the scheduled step. Arrivals at any other step are errors.
pub fn evaluate(rule: &Rule, circuit: &PlacedCircuit, assignment: &BTreeMap<String, bool>) -> Result<BTreeMap<String, bool>, CompileError> {
    if let Some(extra) = assignment.keys().find(|k| !circuit.inputs.contains(k)) {
        return Err(CompileError::UnknownInput(extra.clone()));
    }
    let mut full: Assignment = BTreeMap::new();
    for name in &circuit.inputs {
        full.insert(name.clone(), *assignment.get(name).ok_or_else(|| CompileError::MissingInput(name.clone()))?);
    }
    for name in &circuit.constants {
        full.insert(name.clone(), true);
    }
    let config = inject(&circuit.pattern, &full)?;
    let mut window = Window::new(rule, &config, 8)?;
    let ports: Vec<_> = circuit.outputs.iter().map(|(o, t)| (circuit.pattern.port(o).expect("output port exists"), *t)).collect();
    let mut seen = vec![false; ports.len()];
    for step in 0..=circuit.horizon() {
        if step > 0 {
            window.step()?;
        }
        for ((port, scheduled), hit) in ports.iter().zip(&mut seen) {
            if window.matches(port.stamp_cells(&port.detect_stamp)) {
                if step != *scheduled {
                    return Err(CompileError::UnexpectedArrival { output: port.name.clone(), step, scheduled: *scheduled });
                }
                *hit = true;
            }
        }
    }
    Ok(ports.iter().zip(seen).map(|((p, _), hit)| (p.name.clone(), hit)).collect())
}

/// Every input assignment with its evaluation, in counting order.
pub fn evaluate_all(rule: &Rule, circuit: &PlacedCircuit) -> Vec<(Assignment, Result<Assignment, CompileError>)> {
    let n = circuit.inputs.len();
    let rows: Vec<BTreeMap<String, bool>> = (0..1u64 << n)
        .map(|bits| circuit.inputs.iter().enumerate().map(|(i, name)| (name.clone(), bits >> (n - 1 - i) & 1 == 1)).collect())
        .collect();
    rows.into_par_iter().map(|a| {
        let r = evaluate(rule, circuit, &a);
        (a, r)
    }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::widgets::{load_pattern, save_pattern};

    fn truth_tables_agree(rule: &Rule, net: &Netlist, circuit: &PlacedCircuit) {
        for (a, got) in evaluate_all(rule, circuit) {
            assert_eq!(got.unwrap(), net.evaluate(&a).unwrap(), "{a:?}");
        }
    }

    #[test]
    fn and_compiles_and_evaluates() {
        let rule = canonical_rule(1, 0).unwrap();
        let net = parse_netlist("input A\ninput B\ngate g = AND A B\noutput O = g").unwrap();
        let c = compile(&net, &Catalog::standard(), &rule).unwrap();
        assert!(c.constants.is_empty());
        let g = &c.gates[0];
        assert_eq!(g.a_arrival, g.b_arrival);
        truth_tables_agree(&rule, &net, &c);
    }

    #[test]
    fn andnot_of_a_branched_input_is_false() {
        let rule = canonical_rule(1, 0).unwrap();
        let net = parse_netlist("input A\ngate g = ANDNOT A A\noutput O = g").unwrap();
        let c = compile(&net, &Catalog::standard(), &rule).unwrap();
        for v in [false, true] {
            let out = evaluate(&rule, &c, &[("A".to_string(), v)].into()).unwrap();
            assert!(!out["O"]);
        }
    }

    #[test]
    fn not_gets_a_constant_source() {
        let rule = canonical_rule(1, 0).unwrap();
        let net = parse_netlist("input A\ngate n = NOT A\noutput O = n").unwrap();
        let c = compile(&net, &Catalog::standard(), &rule).unwrap();
        assert_eq!(c.constants.len(), 1);
        truth_tables_agree(&rule, &net, &c);
    }

    #[test]
    fn opposed_andnots_are_rejected() {
        let rule = canonical_rule(1, 0).unwrap();
        let net = parse_netlist("input A\ninput B\ngate x = ANDNOT A B\ngate y = ANDNOT B A\noutput P = x\noutput Q = y").unwrap();
        let err = compile(&net, &Catalog::standard(), &rule).unwrap_err();
        assert!(matches!(err, CompileError::RoutingInfeasible(_)), "{err}");
    }

    #[test]
    fn mirrored_rule_gets_a_mirrored_layout() {
        let rule = canonical_rule(-1, 0).unwrap();
        let net = parse_netlist("input A\ninput B\ngate g = ANDNOT A B\noutput O = g").unwrap();
        let c = compile(&net, &Catalog::standard(), &rule).unwrap();
        assert!(c.pattern.frame().max_x <= 0);
        truth_tables_agree(&rule, &net, &c);
    }

    #[test]
    fn other_rules_have_no_catalog() {
        let rule = canonical_rule(0, 0).unwrap();
        let net = parse_netlist("input A\noutput O = A").unwrap();
        assert!(matches!(compile(&net, &Catalog::standard(), &rule), Err(CompileError::CatalogIncomplete(_))));
    }

    #[test]
    fn saved_circuits_keep_their_schedule() {
        let rule = canonical_rule(1, 0).unwrap();
        let net = parse_netlist("input A\ngate n = NOT A\noutput O = n").unwrap();
        let c = compile(&net, &Catalog::standard(), &rule).unwrap();
        let back = PlacedCircuit::from_pattern(load_pattern(&save_pattern(&c.pattern)).unwrap());
        assert_eq!(back.inputs, c.inputs);
        assert_eq!(back.constants, c.constants);
        assert_eq!(back.outputs, c.outputs);
        truth_tables_agree(&rule, &net, &back);
    }

    #[test]
    fn evaluation_needs_every_input() {
        let rule = canonical_rule(1, 0).unwrap();
        let net = parse_netlist("input A\ninput B\ngate g = AND A B\noutput O = g").unwrap();
        let c = compile(&net, &Catalog::standard(), &rule).unwrap();
        let partial = [("A".to_string(), true)].into();
        assert_eq!(evaluate(&rule, &c, &partial), Err(CompileError::MissingInput("B".into())));
        let extra = [("A".to_string(), true), ("B".to_string(), true), ("C".to_string(), true)].into();
        assert_eq!(evaluate(&rule, &c, &extra), Err(CompileError::UnknownInput("C".into())));
    }
}
