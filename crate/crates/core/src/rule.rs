//! Local rules as explicit `Q^5` lookup tables.

use std::fmt;

use thiserror::Error;

use crate::flow::{FlowLaw, FlowSpec};
use crate::state::{gcd, Neighborhood, State, StateSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("state alphabet is empty")]
    EmptyAlphabet,
    #[error("state alphabet too large ({0})")]
    AlphabetTooLarge(usize),
    #[error("closure violation: f{tuple} = {value} is not a state")]
    ClosureViolation { tuple: Neighborhood, value: State },
    #[error("quiescent violation: state {quiescent} is not fixed by the rule")]
    QuiescentViolation { quiescent: State },
    #[error("flow invariant violated: {0}")]
    FlowInvariantViolation(FlowLaw),
    #[error("state {0} is outside the alphabet")]
    StateOutOfAlphabet(State),
    #[error("alphabet mismatch: configuration uses quiescent {found}, rule expects {expected}")]
    AlphabetMismatch { expected: State, found: State },
    #[error("cyclic extension needs a word of length >= 2, got {0}")]
    WordTooShort(usize),
    #[error("cannot normalize a single-state alphabet")]
    DegenerateAlphabet,
    #[error("beta must be -1, 0 or 1, got {0}")]
    InvalidBeta(i64),
    #[error("table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
}

/// A von Neumann cellular automaton `(Q, f, q0)` with `f` stored as a table.
///
/// Entries are indexed by the positions of `(c, u, r, d, l)` in the ascending
/// alphabet, `c` most significant. The table is closed over `Q` and fixes the
/// quiescent neighborhood; rotation symmetry is checked separately, so
/// asymmetric tables can still be represented and diagnosed.
#[derive(Clone, Debug)]
pub struct Rule {
    name: String,
    states: StateSet,
    quiescent: State,
    table: Vec<u8>,
    provenance: Option<FlowSpec>,
}

impl PartialEq for Rule {
    /// Rules are equal when they realize the same automaton; names and
    /// provenance are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states && self.quiescent == other.quiescent && self.table == other.table
    }
}

impl Eq for Rule {}

impl Rule {
    /// Tabulates `f` over every 5-tuple.
    pub fn from_fn(
        states: StateSet,
        quiescent: State,
        f: impl Fn(Neighborhood) -> State,
    ) -> Result<Self, RuleError> {
        let n = states.len();
        let mut table = Vec::with_capacity(n.pow(5));
        for index in 0..n.pow(5) {
            let tuple = tuple_at(&states, index);
            let value = f(tuple);
            let vi = states.index_of(value).ok_or(RuleError::ClosureViolation { tuple, value })?;
            table.push(vi as u8);
        }
        Self::from_index_table(states, quiescent, table)
    }

    /// Takes a table of state values listed in canonical tuple order.
    pub fn from_values(states: StateSet, quiescent: State, values: &[State]) -> Result<Self, RuleError> {
        let expected = states.len().pow(5);
        if values.len() != expected {
            return Err(RuleError::TableSize { expected, found: values.len() });
        }
        let mut table = Vec::with_capacity(expected);
        for (index, &value) in values.iter().enumerate() {
            let vi = states
                .index_of(value)
                .ok_or_else(|| RuleError::ClosureViolation { tuple: tuple_at(&states, index), value })?;
            table.push(vi as u8);
        }
        Self::from_index_table(states, quiescent, table)
    }

    fn from_index_table(states: StateSet, quiescent: State, table: Vec<u8>) -> Result<Self, RuleError> {
        let qi = states.index_of(quiescent).ok_or(RuleError::QuiescentViolation { quiescent })?;
        let n = states.len();
        let uniform = (0..5).fold(0, |acc, _| acc * n + qi);
        if table[uniform] as usize != qi {
            return Err(RuleError::QuiescentViolation { quiescent });
        }
        Ok(Self { name: "custom".into(), states, quiescent, table, provenance: None })
    }

    /// The identity rule over `states`.
    pub fn identity(states: StateSet, quiescent: State) -> Result<Self, RuleError> {
        let mut rule = Self::from_fn(states.clone(), quiescent, |t| t.c)?;
        rule.provenance = Some(FlowSpec::zero(states));
        rule.name = "identity".into();
        Ok(rule)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn quiescent(&self) -> State {
        self.quiescent
    }

    pub fn provenance(&self) -> Option<&FlowSpec> {
        self.provenance.as_ref()
    }

    /// Raw table of result indices in canonical tuple order.
    pub fn index_table(&self) -> &[u8] {
        &self.table
    }

    /// Table values in canonical tuple order.
    pub fn values(&self) -> Vec<State> {
        self.table.iter().map(|&i| self.states.state_at(i as usize)).collect()
    }

    /// Every `(tuple, value)` pair in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (Neighborhood, State)> + '_ {
        self.table
            .iter()
            .enumerate()
            .map(|(i, &v)| (tuple_at(&self.states, i), self.states.state_at(v as usize)))
    }

    #[inline]
    pub(crate) fn lookup_indices(&self, c: usize, u: usize, r: usize, d: usize, l: usize) -> usize {
        let n = self.states.len();
        self.table[(((c * n + u) * n + r) * n + d) * n + l] as usize
    }

    pub(crate) fn tuple_index(&self, t: Neighborhood) -> Result<usize, RuleError> {
        let n = self.states.len();
        let mut acc = 0;
        for s in t.as_array() {
            acc = acc * n + self.states.index_of(s).ok_or(RuleError::StateOutOfAlphabet(s))?;
        }
        Ok(acc)
    }

    /// `f(c,u,r,d,l)`.
    pub fn apply_local(&self, nbhd: Neighborhood) -> Result<State, RuleError> {
        let i = self.tuple_index(nbhd)?;
        Ok(self.states.state_at(self.table[i] as usize))
    }

    /// Returns a copy with one entry replaced. The result may break rotation
    /// symmetry or conservation; closure and the quiescent condition still hold.
    pub fn with_entry(&self, nbhd: Neighborhood, value: State) -> Result<Self, RuleError> {
        let i = self.tuple_index(nbhd)?;
        let vi = self.states.index_of(value).ok_or(RuleError::ClosureViolation { tuple: nbhd, value })?;
        let mut table = self.table.clone();
        table[i] = vi as u8;
        let mut rule = Self::from_index_table(self.states.clone(), self.quiescent, table)?;
        rule.name = format!("{}+perturbed", self.name);
        Ok(rule)
    }

    /// Same table with a different quiescent state.
    pub fn with_quiescent(&self, quiescent: State) -> Result<Self, RuleError> {
        let mut rule = Self::from_index_table(self.states.clone(), quiescent, self.table.clone())?;
        rule.name = self.name.clone();
        rule.provenance = self.provenance.clone();
        Ok(rule)
    }

    pub fn is_rotation_symmetric(&self) -> bool {
        rotation_symmetry_check(&self.states, &self.table)
    }

    /// True when every cell keeps its state: `f(c, ...) = c`.
    pub fn is_trivial(&self) -> bool {
        self.entries().all(|(t, v)| t.c == v)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {} (q0 = {})", self.name, self.states, self.quiescent)
    }
}

/// The 5-tuple at a canonical table position.
pub fn tuple_at(states: &StateSet, mut index: usize) -> Neighborhood {
    let n = states.len();
    let mut a = [0; 5];
    for slot in a.iter_mut().rev() {
        *slot = states.state_at(index % n);
        index /= n;
    }
    Neighborhood::from(a)
}

/// Realizes a flow specification as a rule: each entry is
/// `c + Σ g(c, ·) + T(u,r,d) + T(u,d,l)`.
pub fn build_rule(flow: &FlowSpec, quiescent: State) -> Result<Rule, RuleError> {
    let states = flow.states().clone();
    let n = states.len();
    if !states.contains(quiescent) {
        return Err(RuleError::QuiescentViolation { quiescent });
    }
    let mut table = Vec::with_capacity(n.pow(5));
    for index in 0..n.pow(5) {
        let [c, u, r, d, l] = index_digits(index, n);
        let value = states.state_at(c)
            + flow.direct_at(c, u)
            + flow.direct_at(c, r)
            + flow.direct_at(c, d)
            + flow.direct_at(c, l)
            + flow.four_cycle_at(u, r, d, l);
        let vi = states
            .index_of(value)
            .ok_or_else(|| RuleError::ClosureViolation { tuple: tuple_at(&states, index), value })?;
        table.push(vi as u8);
    }
    let mut rule = Rule::from_index_table(states, quiescent, table)?;
    rule.provenance = Some(flow.clone());
    Ok(rule)
}

pub(crate) fn index_digits(mut index: usize, n: usize) -> [usize; 5] {
    let mut a = [0; 5];
    for slot in a.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    a
}

/// One of the three non-trivial five-state rules over `{0,1,2,3,4}`.
pub fn canonical_rule(beta: i64, quiescent: State) -> Result<Rule, RuleError> {
    if !(-1..=1).contains(&beta) {
        return Err(RuleError::InvalidBeta(beta));
    }
    Ok(build_rule(&FlowSpec::canonical(beta), quiescent)?.with_name(format!("beta={beta}")))
}

/// Checks `f(c,u,r,d,l) = f(c,r,d,l,u)` over all tuples of an index table.
pub fn rotation_symmetry_check(states: &StateSet, table: &[u8]) -> bool {
    let n = states.len();
    (0..n.pow(5)).all(|i| {
        let [c, u, r, d, l] = index_digits(i, n);
        let j = (((c * n + r) * n + d) * n + l) * n + u;
        table[i] == table[j]
    })
}

/// Exchanges the roles of the left and right neighbors.
pub fn mirror_rule(rule: &Rule) -> Rule {
    let n = rule.states.len();
    let table = (0..n.pow(5))
        .map(|i| {
            let [c, u, r, d, l] = index_digits(i, n);
            rule.table[(((c * n + u) * n + l) * n + d) * n + r]
        })
        .collect();
    let name = match rule.name.strip_prefix("beta=") {
        Some(b) => match b.parse::<i64>() {
            Ok(beta) => format!("beta={}", -beta),
            Err(_) => format!("mirror({})", rule.name),
        },
        None => format!("mirror({})", rule.name),
    };
    Rule {
        name,
        states: rule.states.clone(),
        quiescent: rule.quiescent,
        table,
        provenance: rule.provenance.as_ref().map(FlowSpec::mirrored),
    }
}

/// The renaming `x -> (x - offset) / scale`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub offset: State,
    pub scale: State,
}

impl AffineMap {
    pub const IDENTITY: Self = Self { offset: 0, scale: 1 };

    pub fn apply(&self, x: State) -> State {
        (x - self.offset) / self.scale
    }

    pub fn invert(&self, y: State) -> State {
        y * self.scale + self.offset
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.offset, self.scale) {
            (0, 1) => write!(f, "x"),
            (0, s) => write!(f, "x/{s}"),
            (o, 1) => write!(f, "x-{o}"),
            (o, s) => write!(f, "(x-{o})/{s}"),
        }
    }
}

/// Renames states affinely so the alphabet has minimum 0 and difference gcd 1.
/// The table keeps its shape because the map preserves order.
pub fn normalize_states(rule: &Rule) -> Result<(Rule, AffineMap), RuleError> {
    if rule.states.len() < 2 {
        return Err(RuleError::DegenerateAlphabet);
    }
    let min = rule.states.min();
    let scale = rule.states.iter().fold(0, |acc, s| gcd(acc, s - min));
    let map = AffineMap { offset: min, scale };
    if map.is_identity() {
        return Ok((rule.clone(), map));
    }
    let states = StateSet::new(rule.states.iter().map(|s| map.apply(s)))?;
    let normalized = Rule {
        name: rule.name.clone(),
        states,
        quiescent: map.apply(rule.quiescent),
        table: rule.table.clone(),
        provenance: None,
    };
    Ok((normalized, map))
}

/// Renames states by an arbitrary order-preserving affine map `x -> a*x + b`, `a > 0`.
pub fn rename_affine(rule: &Rule, a: State, b: State) -> Result<Rule, RuleError> {
    assert!(a > 0, "renaming must preserve order");
    let states = StateSet::new(rule.states.iter().map(|s| a * s + b))?;
    Ok(Rule {
        name: rule.name.clone(),
        states,
        quiescent: a * rule.quiescent + b,
        table: rule.table.clone(),
        provenance: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta(b: i64) -> Rule {
        canonical_rule(b, 0).unwrap()
    }

    fn at(rule: &Rule, t: [State; 5]) -> State {
        rule.apply_local(t.into()).unwrap()
    }

    #[test]
    fn canonical_entries() {
        assert_eq!(at(&beta(1), [0, 4, 4, 4, 4]), 4);
        assert_eq!(at(&beta(1), [0, 0, 0, 4, 1]), 2);
        assert_eq!(at(&beta(0), [0, 0, 0, 4, 1]), 1);
        for q in 0..5 {
            assert_eq!(at(&beta(1), [q; 5]), q);
        }
    }

    #[test]
    fn local_application() {
        assert_eq!(at(&beta(1), [4, 0, 0, 0, 0]), 0);
        assert_eq!(at(&beta(1), [2, 0, 4, 0, 1]), 2);
        assert_eq!(
            beta(1).apply_local(Neighborhood::new(0, 0, 9, 0, 0)),
            Err(RuleError::StateOutOfAlphabet(9))
        );
    }

    #[test]
    fn beta_zero_keeps_middle_states() {
        let r = beta(0);
        for (t, v) in r.entries() {
            if (1..=3).contains(&t.c) {
                assert_eq!(v, t.c, "{t}");
            }
        }
    }

    #[test]
    fn invalid_beta() {
        assert_eq!(canonical_rule(2, 0), Err(RuleError::InvalidBeta(2)));
    }

    #[test]
    fn quiescent_must_be_a_state() {
        assert_eq!(canonical_rule(1, 7), Err(RuleError::QuiescentViolation { quiescent: 7 }));
    }

    #[test]
    fn closure_violation_reported() {
        let q = StateSet::range(2);
        // g(0,1) = 1 would push f(0,1,1,1,1) to 4
        let flow = FlowSpec::from_fn(
            q,
            |x, y| match (x, y) {
                (0, 1) => 1,
                (1, 0) => -1,
                _ => 0,
            },
            |_, _, _| 0,
        )
        .unwrap();
        assert!(matches!(build_rule(&flow, 0), Err(RuleError::ClosureViolation { .. })));
    }

    #[test]
    fn rotation_symmetry() {
        let r = beta(1);
        assert!(r.is_rotation_symmetric());
        let perturbed = r.with_entry(Neighborhood::new(2, 0, 4, 0, 1), 3).unwrap();
        assert!(!perturbed.is_rotation_symmetric());
        assert!(Rule::identity(StateSet::range(5), 0).unwrap().is_rotation_symmetric());
    }

    #[test]
    fn mirror_relations() {
        assert_eq!(mirror_rule(&beta(1)), beta(-1));
        assert_eq!(mirror_rule(&beta(1)).name(), "beta=-1");
        assert_eq!(mirror_rule(&mirror_rule(&beta(1))), beta(1));
        assert_eq!(mirror_rule(&beta(0)), beta(0));
        assert_ne!(beta(1), beta(-1));
        assert!(mirror_rule(&beta(1)).is_rotation_symmetric());
    }

    #[test]
    fn normalize_scaled_alphabet() {
        let scaled = rename_affine(&beta(1), 4, 10).unwrap();
        assert_eq!(scaled.states().as_slice(), &[10, 14, 18, 22, 26]);
        let (norm, map) = normalize_states(&scaled).unwrap();
        assert_eq!(map, AffineMap { offset: 10, scale: 4 });
        assert_eq!(norm, beta(1).with_quiescent(0).unwrap());
        assert_eq!(map.to_string(), "(x-10)/4");

        let (same, id) = normalize_states(&beta(1)).unwrap();
        assert!(id.is_identity());
        assert_eq!(same, beta(1));

        let two = Rule::identity(StateSet::new([0, 2]).unwrap(), 0).unwrap();
        let (n2, m2) = normalize_states(&two).unwrap();
        assert_eq!(n2.states().as_slice(), &[0, 1]);
        assert_eq!(m2.to_string(), "x/2");

        let one = Rule::identity(StateSet::new([3]).unwrap(), 3).unwrap();
        assert_eq!(normalize_states(&one), Err(RuleError::DegenerateAlphabet));
    }
}
