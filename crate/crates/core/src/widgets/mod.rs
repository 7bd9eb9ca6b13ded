//! Circuit elements as data: patterns with ports, injection of boolean
//! assignments (a missing signal is `false`), stamp-based observation and
//! behavioral validation against truth tables.

mod catalog;
mod function;
mod pattern;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Cell, Configuration};
use crate::rule::{canonical_rule, Rule, RuleError};
use crate::simulate::{run_with, Checks, RunOptions, RunRecord, SimError};
use crate::state::State;

pub use catalog::{
    branch, ccw_corner, corner_ccw_cells, corner_widget, cw_corner, gate_and, gate_andnot, green_wire, red_wire, wire_cells, Catalog,
    CCW_CORNER_LATENCY, CW_CORNER_LATENCY,
};
pub use function::SINGLE_USE_NOTE;
pub use pattern::{load_pattern, render_rows, save_pattern, Direction, Pattern, Port, PortRole, Stamp};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WidgetError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("port {port} or one of its stamps lies outside the pattern frame")]
    PortOutOfFrame { port: String },
    #[error("grid cell {cell} lies outside the pattern frame")]
    GridOutOfFrame { cell: Cell },
    #[error("duplicate port name {0}")]
    DuplicatePort(String),
    #[error("unknown input port {0}")]
    UnknownPort(String),
    #[error("no value given for input {0}")]
    MissingInput(String),
    #[error("stamps write both {first} and {second} to cell {cell}")]
    StampConflict { cell: Cell, first: State, second: State },
    #[error("port {port} expects an arrival at step {latency}, beyond the horizon {horizon}")]
    HorizonTooShort { port: String, latency: u64, horizon: u64 },
    #[error("output {0} declares no latency")]
    MissingLatency(String),
    #[error("truth table does not cover all {expected} input assignments")]
    IncompleteTruthTable { expected: usize },
    #[error("arrival times {arrivals:?} are not affine in the lengths {lengths:?}")]
    NonLinearPropagation { lengths: Vec<u32>, arrivals: Vec<u64> },
    #[error("no arrival for wire length {length} within {horizon} steps")]
    NoArrival { length: u32, horizon: u64 },
    #[error("output {0} has no `{0} = ...` note declaring its function")]
    UndeclaredFunction(String),
    #[error("function of output {port}: {reason}")]
    BadFunction { port: String, reason: String },
    #[error("speed measurement needs a single-input, single-output wire and two distinct lengths")]
    NotAWireFamily,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Input or output values keyed by port name.
pub type Assignment = BTreeMap<String, bool>;

/// One truth-table row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthRow {
    pub inputs: Assignment,
    pub outputs: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Widget {
    pub pattern: Pattern,
    pub truth_table: Vec<TruthRow>,
    /// Declared signal speed in cells per step, for wires.
    pub speed_spec: Option<Ratio<i64>>,
    /// Whether a second signal must fail to cross after a first traversal.
    pub single_use: bool,
}

impl Widget {
    /// Tabulates `f` over every input assignment.
    pub fn from_fn(pattern: Pattern, f: impl Fn(&Assignment) -> Assignment) -> Self {
        let truth_table = all_assignments(&pattern).into_iter().map(|inputs| TruthRow { outputs: f(&inputs), inputs }).collect();
        Widget { pattern, truth_table, speed_spec: None, single_use: false }
    }

    pub fn with_speed(mut self, speed: Ratio<i64>) -> Self {
        self.speed_spec = Some(speed);
        self
    }

    pub fn single_use(mut self) -> Self {
        self.single_use = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.pattern.name
    }

    /// The same widget reflected left to right, for the mirrored rule.
    pub fn mirrored(&self) -> Widget {
        Widget { pattern: self.pattern.mirrored(), ..self.clone() }
    }

    fn check_table(&self) -> Result<(), WidgetError> {
        let expected = all_assignments(&self.pattern);
        let covered = expected.iter().all(|a| self.truth_table.iter().any(|row| &row.inputs == a));
        if covered {
            Ok(())
        } else {
            Err(WidgetError::IncompleteTruthTable { expected: expected.len() })
        }
    }
}

/// Every assignment of the pattern's inputs, in binary counting order with
/// the first declared input as the most significant bit.
pub fn all_assignments(pattern: &Pattern) -> Vec<Assignment> {
    let names: Vec<&str> = pattern.inputs().map(|p| p.name.as_str()).collect();
    let n = names.len();
    (0..1u64 << n)
        .map(|bits| names.iter().enumerate().map(|(i, name)| (name.to_string(), bits >> (n - 1 - i) & 1 == 1)).collect())
        .collect()
}

/// The base grid with the inject stamp of every true input applied.
pub fn inject(pattern: &Pattern, assignment: &Assignment) -> Result<Configuration, WidgetError> {
    for name in assignment.keys() {
        if !pattern.inputs().any(|p| &p.name == name) {
            return Err(WidgetError::UnknownPort(name.clone()));
        }
    }
    let mut config = pattern.grid.clone();
    let mut written: BTreeMap<Cell, State> = BTreeMap::new();
    for port in pattern.inputs() {
        let on = *assignment.get(&port.name).ok_or_else(|| WidgetError::MissingInput(port.name.clone()))?;
        if !on {
            continue;
        }
        for (cell, state) in port.stamp_cells(&port.inject_stamp) {
            if let Some(&first) = written.get(&cell) {
                if first != state {
                    return Err(WidgetError::StampConflict { cell, first, second: state });
                }
            }
            written.insert(cell, state);
            config.set(cell, state);
        }
    }
    Ok(config)
}

/// Earliest recorded step at which all of the port's detect expectations
/// hold; `None` when the record has no frames or never matches.
pub fn observe(record: &RunRecord, port: &Port) -> Option<u64> {
    record.frames.as_ref()?.iter().position(|c| port.detects(c)).map(|t| t as u64)
}

/// Runs `config` for `horizon` steps with conservation and locality asserted
/// and reports the first detection step of each port.
pub fn first_arrivals(rule: &Rule, config: &Configuration, ports: &[&Port], horizon: u64) -> Result<Vec<Option<u64>>, WidgetError> {
    let mut seen = vec![None; ports.len()];
    let opts = RunOptions { checks: Checks::GENERIC, ..RunOptions::new(horizon) };
    run_with(rule, config, opts, |t, c| {
        for (slot, port) in seen.iter_mut().zip(ports) {
            if slot.is_none() && port.detects(c) {
                *slot = Some(t);
            }
        }
    })?;
    Ok(seen)
}

/// Expected against observed behavior of one output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputOutcome {
    pub port: String,
    pub expected: bool,
    pub latency: u64,
    pub observed: Option<u64>,
}

impl OutputOutcome {
    pub fn passes(&self) -> bool {
        if self.expected {
            self.observed == Some(self.latency)
        } else {
            self.observed.is_none()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentOutcome {
    pub inputs: Assignment,
    pub outputs: Vec<OutputOutcome>,
}

impl AssignmentOutcome {
    pub fn passes(&self) -> bool {
        self.outputs.iter().all(OutputOutcome::passes)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidgetReport {
    pub widget: String,
    pub outcomes: Vec<AssignmentOutcome>,
    /// Arrivals of a second signal sent after the first traversal, when the
    /// widget is declared single-use. Passing means none arrived.
    pub reuse_arrivals: Option<Vec<Option<u64>>>,
    pub verdict: bool,
}

impl fmt::Display for WidgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "widget {}", self.widget)?;
        for o in &self.outcomes {
            let ins: Vec<String> = o.inputs.iter().map(|(k, v)| format!("{k}={}", u8::from(*v))).collect();
            let outs: Vec<String> = o
                .outputs
                .iter()
                .map(|r| {
                    let seen = r.observed.map_or("none".to_string(), |t| format!("t={t}"));
                    let want = if r.expected { format!("t={}", r.latency) } else { "none".to_string() };
                    format!("{}: expected {want} observed {seen}", r.port)
                })
                .collect();
            writeln!(f, "  {} -> {} [{}]", ins.join(" "), outs.join(", "), if o.passes() { "ok" } else { "FAIL" })?;
        }
        if let Some(reuse) = &self.reuse_arrivals {
            let ok = reuse.iter().all(Option::is_none);
            writeln!(f, "  second signal: {}", if ok { "blocked" } else { "arrived (FAIL)" })?;
        }
        write!(f, "verdict: {}", if self.verdict { "pass" } else { "fail" })
    }
}

/// Injects every truth-table row, runs to `horizon` and compares arrivals
/// with the declared latencies.
pub fn validate_widget(rule: &Rule, widget: &Widget, horizon: u64) -> Result<WidgetReport, WidgetError> {
    widget.check_table()?;
    let outputs: Vec<&Port> = widget.pattern.outputs().collect();
    let mut latencies = Vec::with_capacity(outputs.len());
    for port in &outputs {
        let latency = port.latency.ok_or_else(|| WidgetError::MissingLatency(port.name.clone()))?;
        if latency > horizon {
            return Err(WidgetError::HorizonTooShort { port: port.name.clone(), latency, horizon });
        }
        latencies.push(latency);
    }
    let outcomes = widget
        .truth_table
        .par_iter()
        .map(|row| {
            let config = inject(&widget.pattern, &row.inputs)?;
            let seen = first_arrivals(rule, &config, &outputs, horizon)?;
            let outputs = outputs
                .iter()
                .zip(&latencies)
                .zip(seen)
                .map(|((port, &latency), observed)| OutputOutcome {
                    port: port.name.clone(),
                    expected: row.outputs.get(&port.name).copied().unwrap_or(false),
                    latency,
                    observed,
                })
                .collect();
            Ok(AssignmentOutcome { inputs: row.inputs.clone(), outputs })
        })
        .collect::<Result<Vec<_>, WidgetError>>()?;
    let reuse_arrivals = if widget.single_use { Some(second_signal(rule, widget, &outputs, horizon)?) } else { None };
    let verdict =
        outcomes.iter().all(AssignmentOutcome::passes) && reuse_arrivals.as_ref().is_none_or(|r| r.iter().all(Option::is_none));
    Ok(WidgetReport { widget: widget.name().to_string(), outcomes, reuse_arrivals, verdict })
}

/// Sends all inputs, lets them traverse, then stamps them again on the
/// traversed grid and reports what reaches the outputs.
fn second_signal(rule: &Rule, widget: &Widget, outputs: &[&Port], horizon: u64) -> Result<Vec<Option<u64>>, WidgetError> {
    let all_on: Assignment = widget.pattern.inputs().map(|p| (p.name.clone(), true)).collect();
    let first = inject(&widget.pattern, &all_on)?;
    let mut after = first.clone();
    run_with(rule, &first, RunOptions { checks: Checks::GENERIC, ..RunOptions::new(horizon) }, |t, c| {
        if t == horizon {
            after = c.clone();
        }
    })?;
    for port in widget.pattern.inputs() {
        for (cell, state) in port.stamp_cells(&port.inject_stamp) {
            after.set(cell, state);
        }
    }
    first_arrivals(rule, &after, outputs, horizon)
}

/// The canonical rule a pattern targets.
pub fn pattern_rule(pattern: &Pattern) -> Result<Rule, WidgetError> {
    Ok(canonical_rule(pattern.beta, pattern.quiescent)?)
}

/// Fits arrival time against length over a wire family and returns the
/// speed in cells per step.
pub fn measure_speed(rule: &Rule, family: impl Fn(u32) -> Widget, lengths: &[u32]) -> Result<Ratio<i64>, WidgetError> {
    let mut arrivals = Vec::with_capacity(lengths.len());
    for &length in lengths {
        let wire = family(length);
        let (Some(input), Some(output), None) = (wire.pattern.inputs().next(), wire.pattern.outputs().next(), wire.pattern.outputs().nth(1))
        else {
            return Err(WidgetError::NotAWireFamily);
        };
        let horizon = 4 * (length as u64 + wire.pattern.width as u64 + wire.pattern.height as u64) + 16;
        let on: Assignment = [(input.name.clone(), true)].into();
        let seen = first_arrivals(rule, &inject(&wire.pattern, &on)?, &[output], horizon)?;
        arrivals.push(seen[0].ok_or(WidgetError::NoArrival { length, horizon })?);
    }
    let distinct: Vec<usize> = (1..lengths.len()).filter(|&i| lengths[i] != lengths[0]).collect();
    let Some(&k) = distinct.first() else {
        return Err(WidgetError::NotAWireFamily);
    };
    let slope = Ratio::new(arrivals[k] as i64 - arrivals[0] as i64, lengths[k] as i64 - lengths[0] as i64);
    let affine = lengths.iter().zip(&arrivals).all(|(&l, &t)| {
        Ratio::from_integer(t as i64 - arrivals[0] as i64) == slope * Ratio::from_integer(l as i64 - lengths[0] as i64)
    });
    if !affine || slope <= Ratio::from_integer(0) {
        return Err(WidgetError::NonLinearPropagation { lengths: lengths.to_vec(), arrivals });
    }
    Ok(slope.recip())
}
