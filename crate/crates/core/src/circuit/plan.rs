//! Logical placement: every signal travels on its own eastward row, rows are
//! stacked top to bottom and never cross. A gate needs its two operand rows
//! next to each other (first operand on top); a branch puts the copy
//! directly below the original. The planner searches for an input order
//! and gate order under which every gate finds its operands adjacent, then
//! fixes the phase classes the gate geometry demands.

use std::collections::{HashMap, HashSet};

use super::netlist::{GateOp, Netlist};
use super::CompileError;

pub type RowId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    AndNot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signal {
    Net(usize),
    True,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowOrigin {
    Input(usize),
    True,
    Copy(RowId),
    Gate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    /// Duplicates `row`; `copy` runs directly below it.
    Branch { row: RowId, copy: RowId },
    /// `a` on top, `b` directly below; `out` continues on `a`'s level.
    /// Rows of origin `True` are fresh constant sources.
    Gate { kind: GateKind, a: RowId, b: RowId, out: RowId, name: String },
    Output { row: RowId, name: String },
    Drop { row: RowId },
}

/// The netlist with names resolved: nets `0..inputs` are inputs, the rest
/// are gates in order.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub inputs: Vec<String>,
    pub gates: Vec<(String, GateKind, Signal, Signal)>,
    pub outputs: Vec<(String, Signal)>,
}

impl Resolved {
    pub fn new(net: &Netlist) -> Result<Resolved, CompileError> {
        let mut ids: HashMap<&str, Signal> = HashMap::new();
        for (i, n) in net.inputs.iter().enumerate() {
            ids.insert(n, Signal::Net(i));
        }
        for c in &net.constants {
            ids.insert(c, Signal::True);
        }
        let mut gates = vec![];
        for (k, g) in net.gates.iter().enumerate() {
            let kind = match g.op {
                GateOp::And => GateKind::And,
                GateOp::AndNot => GateKind::AndNot,
                op => return Err(CompileError::NotLowered(format!("gate {} uses {op}", g.name))),
            };
            let sig = |o: &String| ids.get(o.as_str()).copied().ok_or_else(|| CompileError::UndefinedName { name: o.clone(), line: 0 });
            gates.push((g.name.clone(), kind, sig(&g.operands[0])?, sig(&g.operands[1])?));
            ids.insert(&g.name, Signal::Net(net.inputs.len() + k));
        }
        let outputs = net
            .outputs
            .iter()
            .map(|(o, s)| Ok((o.clone(), *ids.get(s.as_str()).ok_or_else(|| CompileError::UndefinedName { name: s.clone(), line: 0 })?)))
            .collect::<Result<_, CompileError>>()?;
        Ok(Resolved { inputs: net.inputs.clone(), gates, outputs })
    }

    fn nets(&self) -> usize {
        self.inputs.len() + self.gates.len()
    }
}

/// The result of planning: rows, operations in left-to-right order, and
/// the initial top-to-bottom order of the input rows.
#[derive(Clone, Debug)]
pub struct Plan {
    pub rows: Vec<RowOrigin>,
    pub ops: Vec<Op>,
    pub input_order: Vec<RowId>,
}

#[derive(Clone)]
struct Search {
    live: Vec<RowId>,
    row_net: Vec<Option<usize>>,
    rows: Vec<RowOrigin>,
    uses: Vec<u32>,
    gate_done: Vec<bool>,
    out_done: Vec<bool>,
    ops: Vec<Op>,
}

impl Search {
    fn rows_of(&self, net: usize) -> usize {
        self.live.iter().filter(|&&r| self.row_net[r] == Some(net)).count()
    }

    fn new_row(&mut self, origin: RowOrigin, net: Option<usize>) -> RowId {
        self.rows.push(origin);
        self.row_net.push(net);
        self.rows.len() - 1
    }

    /// Copies the row at `pos`; the copy lands at `pos + 1`.
    fn branch(&mut self, pos: usize) {
        let row = self.live[pos];
        let copy = self.new_row(RowOrigin::Copy(row), self.row_net[row]);
        self.live.insert(pos + 1, copy);
        self.ops.push(Op::Branch { row, copy });
    }

    fn key(&self) -> (Vec<Option<usize>>, Vec<bool>, Vec<bool>) {
        (self.live.iter().map(|&r| self.row_net[r]).collect(), self.gate_done.clone(), self.out_done.clone())
    }

    fn finished(&self) -> bool {
        self.live.is_empty() && self.gate_done.iter().all(|&d| d) && self.out_done.iter().all(|&d| d)
    }

    /// Emits ready outputs and drops rows nobody needs any more.
    fn settle(&mut self, net: &Resolved) {
        loop {
            let mut progress = false;
            for (k, (name, sig)) in net.outputs.iter().enumerate() {
                if self.out_done[k] {
                    continue;
                }
                match *sig {
                    Signal::True => {
                        let row = self.new_row(RowOrigin::True, None);
                        self.ops.push(Op::Output { row, name: name.clone() });
                    }
                    Signal::Net(n) => {
                        let Some(pos) = self.live.iter().rposition(|&r| self.row_net[r] == Some(n)) else { continue };
                        let pos = if self.uses[n] as usize > self.rows_of(n) {
                            self.branch(pos);
                            pos + 1
                        } else {
                            pos
                        };
                        let row = self.live.remove(pos);
                        self.uses[n] -= 1;
                        self.ops.push(Op::Output { row, name: name.clone() });
                    }
                }
                self.out_done[k] = true;
                progress = true;
            }
            let mut i = 0;
            while i < self.live.len() {
                let n = self.row_net[self.live[i]].expect("live rows carry nets");
                if self.rows_of(n) > self.uses[n] as usize {
                    let row = self.live.remove(i);
                    self.ops.push(Op::Drop { row });
                    progress = true;
                } else {
                    i += 1;
                }
            }
            if !progress {
                return;
            }
        }
    }

    /// Every way to perform some pending gate now.
    fn actions(&self, net: &Resolved) -> Vec<Action> {
        let mut out = vec![];
        let ni = net.inputs.len();
        let available = |s: Signal| match s {
            Signal::True => true,
            Signal::Net(n) => n < ni || self.gate_done[n - ni],
        };
        for (g, &(_, kind, a, b)) in net.gates.iter().enumerate() {
            if self.gate_done[g] || !available(a) || !available(b) {
                continue;
            }
            match (a, b) {
                (Signal::True, Signal::True) => out.push(Action { gate: g, top: None, swap: false, keep_below: false }),
                (Signal::Net(x), Signal::True) | (Signal::True, Signal::Net(x)) => {
                    for (pos, &r) in self.live.iter().enumerate() {
                        if self.row_net[r] == Some(x) {
                            out.push(Action { gate: g, top: Some(pos), swap: false, keep_below: true });
                            if self.uses[x] as usize > self.rows_of(x) {
                                out.push(Action { gate: g, top: Some(pos), swap: false, keep_below: false });
                            }
                        }
                    }
                }
                (Signal::Net(x), Signal::Net(y)) => {
                    let orientations: &[bool] = if kind == GateKind::And && x != y { &[false, true] } else { &[false] };
                    for &swap in orientations {
                        let (top, bottom) = if swap { (y, x) } else { (x, y) };
                        for pos in 0..self.live.len() {
                            let here = self.row_net[self.live[pos]] == Some(top);
                            let next = self.live.get(pos + 1).map(|&r| self.row_net[r]) == Some(Some(bottom));
                            if here && (next || x == y) {
                                out.push(Action { gate: g, top: Some(pos), swap, keep_below: false });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn apply(&mut self, net: &Resolved, act: Action) {
        let (name, kind, a, b) = net.gates[act.gate].clone();
        let out_net = net.inputs.len() + act.gate;
        self.gate_done[act.gate] = true;
        match (a, b, act.top) {
            (Signal::Net(_), Signal::Net(_), Some(pos)) => {
                let (a, b) = if act.swap { (b, a) } else { (a, b) };
                let (Signal::Net(x), Signal::Net(y)) = (a, b) else { unreachable!() };
                let mut top = pos;
                if x == y {
                    // two rows of the same net: make the pair by branching
                    let pair = self.live.get(pos + 1).is_some_and(|&r| self.row_net[r] == Some(x));
                    if !pair || self.uses[x] as usize > self.rows_of(x) {
                        self.branch(pos);
                    }
                    if self.uses[x] as usize > self.rows_of(x) {
                        self.branch(pos);
                        top = pos + 1;
                    }
                } else {
                    if self.uses[x] as usize > self.rows_of(x) {
                        self.branch(pos);
                        top = pos + 1;
                    }
                    if self.uses[y] as usize > self.rows_of(y) {
                        self.branch(top + 1);
                    }
                }
                self.uses[x] -= 1;
                self.uses[y] -= 1;
                let (ra, rb) = (self.live[top], self.live[top + 1]);
                let outr = self.new_row(RowOrigin::Gate, Some(out_net));
                self.live[top] = outr;
                self.live.remove(top + 1);
                self.ops.push(Op::Gate { kind, a: ra, b: rb, out: outr, name });
            }
            (Signal::Net(x), Signal::True, Some(pos)) | (Signal::True, Signal::Net(x), Some(pos)) => {
                let mut at = pos;
                if self.uses[x] as usize > self.rows_of(x) {
                    self.branch(pos);
                    if !act.keep_below {
                        at = pos + 1;
                    }
                }
                self.uses[x] -= 1;
                let xr = self.live[at];
                let t = self.new_row(RowOrigin::True, None);
                let outr = self.new_row(RowOrigin::Gate, Some(out_net));
                self.live[at] = outr;
                let (ra, rb) = if a == Signal::True { (t, xr) } else { (xr, t) };
                self.ops.push(Op::Gate { kind, a: ra, b: rb, out: outr, name });
            }
            _ => {
                let ta = self.new_row(RowOrigin::True, None);
                let tb = self.new_row(RowOrigin::True, None);
                let outr = self.new_row(RowOrigin::Gate, Some(out_net));
                self.live.push(outr);
                self.ops.push(Op::Gate { kind, a: ta, b: tb, out: outr, name });
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Action {
    gate: usize,
    top: Option<usize>,
    swap: bool,
    /// For single-row gates on a branched row: gate the original and keep
    /// the copy below it (otherwise keep the original above).
    keep_below: bool,
}

/// Maximum number of distinct search states before giving up.
pub const SEARCH_BUDGET: usize = 200_000;

/// Finds an input order and operation sequence in which every gate sees its
/// operands on adjacent rows.
pub fn plan(net: &Resolved) -> Result<Plan, CompileError> {
    let mut uses = vec![0u32; net.nets()];
    for &(_, _, a, b) in &net.gates {
        for s in [a, b] {
            if let Signal::Net(n) = s {
                uses[n] += 1;
            }
        }
    }
    for (_, s) in &net.outputs {
        if let Signal::Net(n) = s {
            uses[*n] += 1;
        }
    }
    let ni = net.inputs.len();
    let mut seen = HashSet::new();
    let mut order: Vec<usize> = (0..ni).collect();
    let mut found = None;
    permutations(&mut order, 0, &mut |perm| {
        let mut s = Search {
            live: perm.to_vec(),
            row_net: (0..ni).map(Some).collect(),
            rows: (0..ni).map(RowOrigin::Input).collect(),
            uses: uses.clone(),
            gate_done: vec![false; net.gates.len()],
            out_done: vec![false; net.outputs.len()],
            ops: vec![],
        };
        s.settle(net);
        match dfs(net, s, &mut seen) {
            Some(done) => {
                found = Some(Plan { rows: done.rows, ops: done.ops, input_order: perm.to_vec() });
                true
            }
            None => seen.len() > SEARCH_BUDGET,
        }
    });
    found.ok_or_else(|| {
        CompileError::RoutingInfeasible(if seen.len() > SEARCH_BUDGET {
            "no crossing-free order found within the search budget".into()
        } else {
            "every row order forces two wires to cross".into()
        })
    })
}

/// Search states already expanded.
type Seen = HashSet<(Vec<Option<usize>>, Vec<bool>, Vec<bool>)>;

fn dfs(net: &Resolved, s: Search, seen: &mut Seen) -> Option<Search> {
    if s.finished() {
        return Some(s);
    }
    if seen.len() > SEARCH_BUDGET || !seen.insert(s.key()) {
        return None;
    }
    for act in s.actions(net) {
        let mut next = s.clone();
        next.apply(net, act);
        next.settle(net);
        if let Some(done) = dfs(net, next, seen) {
            return Some(done);
        }
    }
    None
}

/// Calls `f` on each permutation until it returns true.
fn permutations(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if k == items.len() {
        return f(items);
    }
    for i in k..items.len() {
        items.swap(k, i);
        if permutations(items, k + 1, f) {
            return true;
        }
        items.swap(k, i);
    }
    false
}

/// An affine form over GF(2) in the free parity bits of the input rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Form {
    pub mask: u128,
    pub constant: bool,
}

impl Form {
    fn var(i: usize) -> Form {
        Form { mask: 1 << i, constant: false }
    }

    fn flip(self) -> Form {
        Form { constant: !self.constant, ..self }
    }

    fn plus(self, o: Form) -> Form {
        Form { mask: self.mask ^ o.mask, constant: self.constant ^ o.constant }
    }

    fn eval(self, x: u128) -> bool {
        ((self.mask & x).count_ones() % 2 == 1) ^ self.constant
    }
}

/// The two phase parities of a row. With the time `t` at which the signal
/// front sits on cell `x` of a row at height `y`: `rho = x + y` and
/// `sigma = t + y`, both mod 2, for `x` on the signal's phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Class {
    pub rho: bool,
    pub sigma: bool,
}

#[derive(Clone, Copy, Debug, Default)]
struct FormClass {
    rho: Form,
    sigma: Form,
}

/// Gauss-Jordan system over GF(2).
#[derive(Default)]
struct System {
    rows: Vec<(u32, Form)>,
}

impl System {
    fn reduce(&self, mut f: Form) -> Form {
        for &(p, r) in &self.rows {
            if f.mask >> p & 1 == 1 {
                f = f.plus(r);
            }
        }
        f
    }

    /// Adds `f = 0`; false when it contradicts the system.
    fn add(&mut self, f: Form) -> bool {
        let f = self.reduce(f);
        if f.mask == 0 {
            return !f.constant;
        }
        let p = f.mask.trailing_zeros();
        for (_, r) in &mut self.rows {
            if r.mask >> p & 1 == 1 {
                *r = r.plus(f);
            }
        }
        self.rows.push((p, f));
        true
    }

    /// Pivot variables take their equation's constant; free variables are 0.
    fn solution(&self) -> u128 {
        self.rows.iter().filter(|(_, r)| r.constant).fold(0, |acc, &(p, _)| acc | 1 << p)
    }
}

/// Rewrites the plan so that every gate's operand classes are compatible,
/// inserting `AND x TRUE` (flips both parities) and `AND TRUE x` (flips
/// `sigma`) on the lower operand where needed. Returns the class of every
/// row.
pub fn fix_classes(plan: &Plan) -> Result<(Plan, Vec<Class>), CompileError> {
    let inputs = plan.rows.iter().filter(|o| matches!(o, RowOrigin::Input(_))).count();
    if inputs > 64 {
        return Err(CompileError::RoutingInfeasible("more than 64 inputs".into()));
    }
    let mut rows = plan.rows.clone();
    let mut forms: Vec<Option<FormClass>> = vec![None; rows.len()];
    for (r, o) in rows.iter().enumerate() {
        if let RowOrigin::Input(i) = *o {
            forms[r] = Some(FormClass { rho: Form::var(2 * i), sigma: Form::var(2 * i + 1) });
        }
    }
    let mut sys = System::default();
    let rename: HashMap<RowId, RowId> = HashMap::new();
    let mut ops = vec![];
    let mut fixers = 0;
    let get = |rename: &HashMap<RowId, RowId>, r: RowId| *rename.get(&r).unwrap_or(&r);
    for op in &plan.ops {
        match op.clone() {
            Op::Branch { row, copy } => {
                let row = get(&rename, row);
                let f = forms[row].expect("row defined");
                forms[copy] = Some(FormClass { rho: f.rho, sigma: f.sigma.flip() });
                ops.push(Op::Branch { row, copy });
            }
            Op::Output { row, name } => {
                let row = get(&rename, row);
                if forms[row].is_none() {
                    forms[row] = Some(FormClass::default());
                }
                ops.push(Op::Output { row, name });
            }
            Op::Drop { row } => ops.push(Op::Drop { row: get(&rename, row) }),
            Op::Gate { kind, a, b, out, name } => {
                let (a, mut b) = (get(&rename, a), get(&rename, b));
                let (ta, tb) = (rows[a] == RowOrigin::True, rows[b] == RowOrigin::True);
                match (ta, tb) {
                    (true, true) => {
                        forms[a] = Some(FormClass::default());
                        forms[b] = Some(FormClass { rho: Form { mask: 0, constant: true }, sigma: Form::default() });
                    }
                    (true, false) => {
                        let fb = forms[b].expect("row defined");
                        forms[a] = Some(FormClass { rho: fb.rho.flip(), sigma: fb.sigma });
                    }
                    (false, true) => {
                        let fa = forms[a].expect("row defined");
                        forms[b] = Some(FormClass { rho: fa.rho.flip(), sigma: fa.sigma });
                    }
                    (false, false) => {
                        let (fa, fb) = (forms[a].expect("row defined"), forms[b].expect("row defined"));
                        let sigma_ok = sys.add(fa.sigma.plus(fb.sigma));
                        let rho_ok = sys.add(fa.rho.plus(fb.rho).flip());
                        let mut steps = vec![];
                        match (rho_ok, sigma_ok) {
                            (true, true) => {}
                            (false, false) => steps.push(false),
                            (true, false) => steps.push(true),
                            (false, true) => steps.extend([false, true]),
                        }
                        for t_on_top in steps {
                            fixers += 1;
                            let t = rows.len();
                            rows.push(RowOrigin::True);
                            let fixed = t + 1;
                            rows.push(RowOrigin::Gate);
                            forms.extend([None, None]);
                            let f = forms[b].expect("row defined");
                            let tf = FormClass { rho: f.rho.flip(), sigma: f.sigma };
                            forms[t] = Some(tf);
                            let name = format!("fix.{fixers}");
                            if t_on_top {
                                forms[fixed] = Some(FormClass { rho: f.rho, sigma: f.sigma.flip() });
                                ops.push(Op::Gate { kind: GateKind::And, a: t, b, out: fixed, name });
                            } else {
                                forms[fixed] = Some(FormClass { rho: f.rho.flip(), sigma: f.sigma.flip() });
                                ops.push(Op::Gate { kind: GateKind::And, a: b, b: t, out: fixed, name });
                            }
                            b = fixed;
                        }
                    }
                }
                let (fa, fb) = (forms[a].expect("row defined"), forms[b].expect("row defined"));
                forms[out] = Some(FormClass {
                    rho: fb.rho,
                    sigma: if kind == GateKind::And { fa.sigma.flip() } else { fa.sigma },
                });
                ops.push(Op::Gate { kind, a, b, out, name });
            }
        }
    }
    let x = sys.solution();
    let classes = forms
        .iter()
        .map(|f| f.map_or(Class::default(), |f| Class { rho: f.rho.eval(x), sigma: f.sigma.eval(x) }))
        .collect();
    Ok((Plan { rows, ops, input_order: plan.input_order.clone() }, classes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::netlist::{lower_netlist, parse_netlist};

    fn planned(text: &str) -> Result<Plan, CompileError> {
        plan(&Resolved::new(&lower_netlist(&parse_netlist(text).unwrap()))?)
    }

    #[test]
    fn simple_and_plans() {
        let p = planned("input A\ninput B\ngate g = AND A B\noutput O = g").unwrap();
        assert_eq!(p.ops.iter().filter(|o| matches!(o, Op::Gate { .. })).count(), 1);
    }

    #[test]
    fn opposed_andnots_cannot_be_planar() {
        let text = "input A\ninput B\ngate x = ANDNOT A B\ngate y = ANDNOT B A\noutput X = x\noutput Y = y";
        assert!(matches!(planned(text), Err(CompileError::RoutingInfeasible(_))));
    }

    #[test]
    fn shared_operand_branches() {
        let p = planned("input A\ngate g = ANDNOT A A\noutput O = g").unwrap();
        assert!(p.ops.iter().any(|o| matches!(o, Op::Branch { .. })));
    }

    #[test]
    fn classes_satisfy_every_gate() {
        for text in [
            "input A\ngate g = ANDNOT A A\noutput O = g",
            "input A\ninput B\ninput C\ngate x = AND A B\ngate n = NOT C\ngate o = OR x n\noutput O = o",
            "input A\ninput B\ngate o = OR A B\noutput O = o\noutput P = A",
        ] {
            let (p, classes) = fix_classes(&planned(text).unwrap()).unwrap();
            for op in &p.ops {
                if let Op::Gate { a, b, .. } = *op {
                    assert_eq!(classes[a].sigma, classes[b].sigma, "{text}");
                    assert_ne!(classes[a].rho, classes[b].rho, "{text}");
                }
            }
        }
    }

    #[test]
    fn gf2_system() {
        let mut s = System::default();
        assert!(s.add(Form { mask: 0b11, constant: true }));
        assert!(s.add(Form { mask: 0b10, constant: false }));
        assert!(!s.add(Form { mask: 0b01, constant: false }));
        let x = s.solution();
        assert_eq!(x, 0b01);
    }
}
