use std::fmt;

use super::AnalysisError;
use crate::flow::{FlowLaw, FlowSpec};
use crate::rule::{index_digits, Rule};
use crate::state::{Neighborhood, State, StateSet};

/// The direct flow `g` read off a rule, dense over the alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectFlow {
    states: StateSet,
    table: Vec<i64>,
}

impl DirectFlow {
    pub fn from_fn(states: StateSet, g: impl Fn(State, State) -> i64) -> Self {
        let q = states.as_slice();
        let table = q.iter().flat_map(|&x| q.iter().map(move |&y| (x, y))).map(|(x, y)| g(x, y)).collect();
        Self { states, table }
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub(crate) fn at(&self, i: usize, j: usize) -> i64 {
        self.table[i * self.states.len() + j]
    }

    /// `g(x, y)`. Panics on a state outside the alphabet.
    pub fn get(&self, x: State, y: State) -> i64 {
        let i = self.states.index_of(x).expect("state in alphabet");
        let j = self.states.index_of(y).expect("state in alphabet");
        self.at(i, j)
    }

    pub fn table(&self) -> &[i64] {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|&v| v == 0)
    }
}

/// `g(x, y) = (f(x,y,y,y,y) - x) / 4` for every pair.
pub fn extract_direct_flow(rule: &Rule) -> Result<DirectFlow, AnalysisError> {
    let q = rule.states().as_slice();
    let n = q.len();
    let mut table = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            let diff = q[rule.lookup_indices(i, j, j, j, j)] - q[i];
            if diff % 4 != 0 {
                return Err(AnalysisError::NonDivisibleFlow { x: q[i], y: q[j] });
            }
            table[i * n + j] = diff / 4;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if table[i * n + j] != -table[j * n + i] {
                return Err(AnalysisError::AntisymmetryViolation { x: q[i], y: q[j] });
            }
        }
    }
    Ok(DirectFlow { states: rule.states().clone(), table })
}

/// Why a rule is not number-conserving.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `f(t) != f(rotated t)`.
    NotRotationSymmetric { tuple: Neighborhood },
    NonDivisibleFlow { x: State, y: State },
    AntisymmetryViolation { x: State, y: State },
    /// The residual on ring `(u,r,d,l)` takes different values for two centers.
    CenterDependence { ring: [State; 4], centers: (State, State), residuals: (i64, i64) },
    /// The recovered triple table breaks one of its laws.
    TripleLaw(FlowLaw),
    /// The residual is not `T(u,r,d) + T(u,d,l)` on this ring.
    TripleInconsistency { ring: [State; 4], residual: i64, predicted: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotRotationSymmetric { tuple } => {
                write!(f, "NotRotationSymmetric: f{tuple} != f{}", tuple.rotated())
            }
            Violation::NonDivisibleFlow { x, y } => write!(f, "NonDivisibleFlow: f({x},{y},{y},{y},{y}) - {x} not divisible by 4"),
            Violation::AntisymmetryViolation { x, y } => write!(f, "AntisymmetryViolation: g({x},{y}) != -g({y},{x})"),
            Violation::CenterDependence { ring: [u, r, d, l], centers: (c1, c2), residuals: (r1, r2) } => write!(
                f,
                "CenterDependence: ring ({u},{r},{d},{l}) has residual {r1} at center {c1} but {r2} at center {c2}"
            ),
            Violation::TripleLaw(law) => write!(f, "TripleInconsistency: {law}"),
            Violation::TripleInconsistency { ring: [u, r, d, l], residual, predicted } => write!(
                f,
                "TripleInconsistency: ring ({u},{r},{d},{l}) has residual {residual}, T(u,r,d) + T(u,d,l) = {predicted}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ncca(FlowSpec),
    NotNcca(Violation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionResult {
    pub verdict: Verdict,
}

impl DecompositionResult {
    pub fn is_ncca(&self) -> bool {
        matches!(self.verdict, Verdict::Ncca(_))
    }

    pub fn flow(&self) -> Option<&FlowSpec> {
        match &self.verdict {
            Verdict::Ncca(flow) => Some(flow),
            Verdict::NotNcca(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&Violation> {
        match &self.verdict {
            Verdict::Ncca(_) => None,
            Verdict::NotNcca(v) => Some(v),
        }
    }
}

/// Decides whether a rule is a rotation-symmetric number-conserving automaton
/// and, if so, returns its flow certificate.
pub fn decompose(rule: &Rule) -> DecompositionResult {
    let verdict = match try_decompose(rule) {
        Ok(flow) => Verdict::Ncca(flow),
        Err(v) => Verdict::NotNcca(v),
    };
    DecompositionResult { verdict }
}

fn try_decompose(rule: &Rule) -> Result<FlowSpec, Violation> {
    let states = rule.states();
    let q = states.as_slice();
    let n = q.len();

    for index in 0..n.pow(5) {
        let [c, u, r, d, l] = index_digits(index, n);
        if rule.lookup_indices(c, u, r, d, l) != rule.lookup_indices(c, r, d, l, u) {
            let tuple = Neighborhood::new(q[c], q[u], q[r], q[d], q[l]);
            return Err(Violation::NotRotationSymmetric { tuple });
        }
    }

    let g = extract_direct_flow(rule).map_err(|e| match e {
        AnalysisError::NonDivisibleFlow { x, y } => Violation::NonDivisibleFlow { x, y },
        AnalysisError::AntisymmetryViolation { x, y } => Violation::AntisymmetryViolation { x, y },
        other => unreachable!("extract_direct_flow only fails on the flow laws: {other}"),
    })?;

    // residual[ring] is R(u,r,d,l), taken at c = q[0] and compared against every other center
    let n4 = n.pow(4);
    let mut residual = vec![0i64; n4];
    for (ring, slot) in residual.iter_mut().enumerate() {
        let [_, u, r, d, l] = index_digits(ring, n);
        let at = |c: usize| q[rule.lookup_indices(c, u, r, d, l)] - q[c] - g.at(c, u) - g.at(c, r) - g.at(c, d) - g.at(c, l);
        let r0 = at(0);
        for c in 1..n {
            let rc = at(c);
            if rc != r0 {
                return Err(Violation::CenterDependence {
                    ring: [q[u], q[r], q[d], q[l]],
                    centers: (q[0], q[c]),
                    residuals: (r0, rc),
                });
            }
        }
        *slot = r0;
    }

    let ring_index = |u: usize, r: usize, d: usize, l: usize| ((u * n + r) * n + d) * n + l;
    let mut triple = vec![0i64; n * n * n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                triple[(x * n + y) * n + z] = residual[ring_index(x, x, y, z)];
            }
        }
    }
    let direct = g.table.clone();
    let flow = FlowSpec::from_tables(states.clone(), direct, triple).map_err(|e| match e {
        crate::rule::RuleError::FlowInvariantViolation(law) => Violation::TripleLaw(law),
        other => unreachable!("from_tables only fails on flow laws: {other}"),
    })?;

    for (ring, &found) in residual.iter().enumerate() {
        let [_, u, r, d, l] = index_digits(ring, n);
        let predicted = flow.four_cycle_at(u, r, d, l);
        if predicted != found {
            return Err(Violation::TripleInconsistency {
                ring: [q[u], q[r], q[d], q[l]],
                residual: found,
                predicted,
            });
        }
    }
    Ok(flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::{build_rule, canonical_rule};

    #[test]
    fn canonical_direct_flow() {
        let g = extract_direct_flow(&canonical_rule(1, 0).unwrap()).unwrap();
        for x in 0..5 {
            for y in 0..5 {
                let expected = match (x, y) {
                    (0, 4) => 1,
                    (4, 0) => -1,
                    _ => 0,
                };
                assert_eq!(g.get(x, y), expected, "g({x},{y})");
            }
        }
    }

    #[test]
    fn identity_has_zero_flow() {
        let rule = Rule::identity(StateSet::range(4), 0).unwrap();
        assert!(extract_direct_flow(&rule).unwrap().is_zero());
        let flow = decompose(&rule).flow().cloned().unwrap();
        assert!(flow.is_zero());
    }

    #[test]
    fn non_divisible_flow_detected() {
        let id = Rule::identity(StateSet::range(2), 0).unwrap();
        let rule = id.with_entry(Neighborhood::new(0, 1, 1, 1, 1), 1).unwrap();
        assert_eq!(extract_direct_flow(&rule), Err(AnalysisError::NonDivisibleFlow { x: 0, y: 1 }));
    }

    #[test]
    fn canonical_certificates_recovered() {
        for beta in -1..=1 {
            let result = decompose(&canonical_rule(beta, 0).unwrap());
            let flow = result.flow().expect("canonical rule is conserving");
            assert_eq!(flow, &FlowSpec::canonical(beta));
            assert_eq!(flow.triple(0, 4, 1), beta);
        }
    }

    #[test]
    fn majority_rule_rejected() {
        let q = StateSet::range(2);
        let rule = Rule::from_fn(q, 0, |t| {
            let ones: i64 = t.as_array().iter().sum();
            i64::from(ones >= 3)
        })
        .unwrap();
        assert!(!decompose(&rule).is_ncca());
    }

    #[test]
    fn center_dependence_reported() {
        // bump the whole rotation orbit of one ring at a single center; g is untouched
        let base = canonical_rule(1, 0).unwrap();
        let rule = Rule::from_fn(StateSet::range(5), 0, |t| {
            let mut ring = [t.u, t.r, t.d, t.l];
            ring.sort();
            let v = base.apply_local(t).unwrap();
            if t.c == 2 && ring == [0, 1, 2, 3] { v + 1 } else { v }
        })
        .unwrap();
        assert!(rule.is_rotation_symmetric());
        assert!(matches!(decompose(&rule).violation(), Some(Violation::CenterDependence { .. })));
    }

    #[test]
    fn single_entry_perturbation_breaks_symmetry() {
        let rule = canonical_rule(1, 0).unwrap();
        let bad = rule.with_entry(Neighborhood::new(0, 4, 1, 0, 0), 3).unwrap();
        assert!(matches!(decompose(&bad).violation(), Some(Violation::NotRotationSymmetric { .. })));
    }

    #[test]
    fn flow_round_trip_through_rule() {
        let flow = FlowSpec::canonical(-1);
        let rule = build_rule(&flow, 2).unwrap();
        assert_eq!(decompose(&rule).flow(), Some(&flow));
    }
}
