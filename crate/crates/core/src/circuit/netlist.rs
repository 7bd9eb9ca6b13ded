//! The netlist language, its lowering to `AND` and `ANDNOT`, and a plain
//! truth-table interpreter used as the reference semantics.
//!
//! ```text
//! # comment
//! input A
//! const T = 1
//! gate g = AND A B        # also ANDNOT, NOT, OR; ANDNOT a b = (not a) and b
//! output O = g
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::CompileError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    AndNot,
    Not,
    Or,
}

impl GateOp {
    pub fn arity(self) -> usize {
        match self {
            GateOp::Not => 1,
            _ => 2,
        }
    }

    pub fn apply(self, args: &[bool]) -> bool {
        match self {
            GateOp::And => args[0] && args[1],
            GateOp::AndNot => !args[0] && args[1],
            GateOp::Not => !args[0],
            GateOp::Or => args[0] || args[1],
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateOp::And => "AND",
            GateOp::AndNot => "ANDNOT",
            GateOp::Not => "NOT",
            GateOp::Or => "OR",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub op: GateOp,
    pub operands: Vec<String>,
}

/// Gates are kept in dependency order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Netlist {
    pub inputs: Vec<String>,
    /// Names bound to the constant 1.
    pub constants: Vec<String>,
    pub gates: Vec<Gate>,
    /// `(output name, referenced signal)`.
    pub outputs: Vec<(String, String)>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_netlist(text: &str) -> Result<Netlist, CompileError> {
    let syntax = |line: usize, reason: &str| CompileError::SyntaxError { line, reason: reason.to_string() };
    let mut net = Netlist::default();
    let mut defined: HashMap<String, usize> = HashMap::new();
    let mut gate_lines = vec![];
    let mut output_lines = vec![];
    let mut define = |name: &str, line: usize| -> Result<(), CompileError> {
        if !is_ident(name) {
            return Err(syntax(line, &format!("bad name {name:?}")));
        }
        if defined.insert(name.to_string(), line).is_some() {
            return Err(CompileError::DuplicateName { name: name.to_string(), line });
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words.as_slice() {
            ["input", name] => {
                define(name, line)?;
                net.inputs.push(name.to_string());
            }
            ["const", name, "=", "1"] => {
                define(name, line)?;
                net.constants.push(name.to_string());
            }
            ["const", ..] => return Err(syntax(line, "expected `const <NAME> = 1`")),
            ["gate", name, "=", op, operands @ ..] => {
                let op = match *op {
                    "AND" => GateOp::And,
                    "ANDNOT" => GateOp::AndNot,
                    "NOT" => GateOp::Not,
                    "OR" => GateOp::Or,
                    other => return Err(syntax(line, &format!("unknown gate {other:?}"))),
                };
                if operands.len() != op.arity() {
                    return Err(syntax(line, &format!("{op} takes {} operand(s)", op.arity())));
                }
                if let Some(bad) = operands.iter().find(|o| !is_ident(o)) {
                    return Err(syntax(line, &format!("bad operand {bad:?}")));
                }
                define(name, line)?;
                let gate = Gate { name: name.to_string(), op, operands: operands.iter().map(|s| s.to_string()).collect() };
                gate_lines.push((gate, line));
            }
            ["gate", ..] => return Err(syntax(line, "expected `gate <NAME> = <OP> <operand> [<operand>]`")),
            ["output", name, "=", signal] => {
                define(name, line)?;
                if !is_ident(signal) {
                    return Err(syntax(line, &format!("bad operand {signal:?}")));
                }
                output_lines.push(((name.to_string(), signal.to_string()), line));
            }
            ["output", ..] => return Err(syntax(line, "expected `output <NAME> = <operand>`")),
            ["input", ..] => return Err(syntax(line, "expected `input <NAME>`")),
            _ => return Err(syntax(line, &format!("unrecognized statement {content:?}"))),
        }
    }
    let gate_index: HashMap<&str, usize> = gate_lines.iter().enumerate().map(|(i, (g, _))| (g.name.as_str(), i)).collect();
    let is_signal = |name: &str| net.inputs.iter().chain(&net.constants).any(|n| n == name) || gate_index.contains_key(name);
    for (gate, line) in &gate_lines {
        if let Some(bad) = gate.operands.iter().find(|o| !is_signal(o)) {
            return Err(CompileError::UndefinedName { name: bad.clone(), line: *line });
        }
    }
    for ((_, signal), line) in &output_lines {
        if !is_signal(signal) {
            return Err(CompileError::UndefinedName { name: signal.clone(), line: *line });
        }
    }
    net.gates = topological(&gate_lines, &gate_index)?;
    net.outputs = output_lines.into_iter().map(|(o, _)| o).collect();
    Ok(net)
}

/// Depth-first ordering of gates after their operands; a back edge is a cycle.
fn topological(gates: &[(Gate, usize)], index: &HashMap<&str, usize>) -> Result<Vec<Gate>, CompileError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    fn visit(
        i: usize,
        gates: &[(Gate, usize)],
        index: &HashMap<&str, usize>,
        marks: &mut [Mark],
        out: &mut Vec<Gate>,
    ) -> Result<(), CompileError> {
        match marks[i] {
            Mark::Done => return Ok(()),
            Mark::Open => return Err(CompileError::CyclicDependency { name: gates[i].0.name.clone() }),
            Mark::New => {}
        }
        marks[i] = Mark::Open;
        for op in &gates[i].0.operands {
            if let Some(&j) = index.get(op.as_str()) {
                visit(j, gates, index, marks, out)?;
            }
        }
        marks[i] = Mark::Done;
        out.push(gates[i].0.clone());
        Ok(())
    }
    let mut marks = vec![Mark::New; gates.len()];
    let mut out = Vec::with_capacity(gates.len());
    for i in 0..gates.len() {
        visit(i, gates, index, &mut marks, &mut out)?;
    }
    Ok(out)
}

impl Netlist {
    pub fn is_lowered(&self) -> bool {
        self.gates.iter().all(|g| matches!(g.op, GateOp::And | GateOp::AndNot))
    }

    /// Reference semantics: evaluates every gate in order.
    pub fn evaluate(&self, inputs: &BTreeMap<String, bool>) -> Result<BTreeMap<String, bool>, CompileError> {
        let mut env: HashMap<&str, bool> = HashMap::new();
        for name in &self.inputs {
            let v = *inputs.get(name).ok_or_else(|| CompileError::MissingInput(name.clone()))?;
            env.insert(name, v);
        }
        for name in &self.constants {
            env.insert(name, true);
        }
        for g in &self.gates {
            let args: Vec<bool> = g.operands.iter().map(|o| env[o.as_str()]).collect();
            env.insert(&g.name, g.op.apply(&args));
        }
        Ok(self.outputs.iter().map(|(o, s)| (o.clone(), env[s.as_str()])).collect())
    }

    /// Every input assignment, first input most significant.
    pub fn assignments(&self) -> Vec<BTreeMap<String, bool>> {
        let n = self.inputs.len();
        (0..1u64 << n)
            .map(|bits| self.inputs.iter().enumerate().map(|(i, name)| (name.clone(), bits >> (n - 1 - i) & 1 == 1)).collect())
            .collect()
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.inputs {
            writeln!(f, "input {i}")?;
        }
        for c in &self.constants {
            writeln!(f, "const {c} = 1")?;
        }
        for g in &self.gates {
            writeln!(f, "gate {} = {} {}", g.name, g.op, g.operands.join(" "))?;
        }
        for (o, s) in &self.outputs {
            writeln!(f, "output {o} = {s}")?;
        }
        Ok(())
    }
}

/// Rewrites `NOT x` as `ANDNOT x TRUE` and `OR a b` as
/// `NOT (AND (NOT a) (NOT b))`, adding a constant when one is needed.
pub fn lower_netlist(net: &Netlist) -> Netlist {
    if net.is_lowered() {
        return net.clone();
    }
    let mut out = Netlist { gates: vec![], ..net.clone() };
    let truth = match net.constants.first() {
        Some(c) => c.clone(),
        None => {
            let taken = |n: &str| net.inputs.iter().chain(net.gates.iter().map(|g| &g.name)).chain(net.outputs.iter().map(|o| &o.0)).any(|x| x == n);
            let name = (0..).map(|k| if k == 0 { "TRUE".to_string() } else { format!("TRUE_{k}") }).find(|n| !taken(n)).expect("unbounded");
            out.constants.push(name.clone());
            name
        }
    };
    let gate = |name: String, op: GateOp, a: &str, b: &str| Gate { name, op, operands: vec![a.to_string(), b.to_string()] };
    for g in &net.gates {
        match g.op {
            GateOp::And | GateOp::AndNot => out.gates.push(g.clone()),
            GateOp::Not => out.gates.push(gate(g.name.clone(), GateOp::AndNot, &g.operands[0], &truth)),
            GateOp::Or => {
                let (na, nb, both) = (format!("{}.not_a", g.name), format!("{}.not_b", g.name), format!("{}.nor", g.name));
                out.gates.push(gate(na.clone(), GateOp::AndNot, &g.operands[0], &truth));
                out.gates.push(gate(nb.clone(), GateOp::AndNot, &g.operands[1], &truth));
                out.gates.push(gate(both.clone(), GateOp::And, &na, &nb));
                out.gates.push(gate(g.name.clone(), GateOp::AndNot, &both, &truth));
            }
        }
    }
    out
}
