//! Flow functions: the certificate of number conservation.
//!
//! A rotation-symmetric von Neumann rule over integer states conserves the
//! total state sum exactly when it can be written as
//!
//! ```text
//! f(c,u,r,d,l) = c + g(c,u) + g(c,r) + g(c,d) + g(c,l) + cyc(u,r,d,l)
//! ```
//!
//! with `g` antisymmetric and `cyc` the cyclic extension of an antisymmetric
//! pair function `h`. Only the cyclic extension of `h` influences the
//! dynamics, so [`FlowSpec`] keeps it as a table over triples and never
//! stores `h` itself.

use std::fmt;

use crate::rule::RuleError;
use crate::state::{State, StateSet};

/// Direct flow `g` plus the cyclic extension of the indirect flow on triples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlowSpec {
    states: StateSet,
    direct: Vec<i64>,
    triple: Vec<i64>,
}

/// A FlowSpec law that failed, with the offending states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowLaw {
    DirectAntisymmetry(State, State),
    TripleReversal(State, State, State),
    TripleRotation(State, State, State),
    TripleRepeat(State, State, State),
    /// `T(a,b,c) - T(a,b,d) + T(a,c,d) - T(b,c,d) != 0`: the table is not the
    /// cyclic extension of any pair function, and 4-cycle values would depend
    /// on where the cycle is cut.
    TripleCocycle(State, State, State, State),
}

impl fmt::Display for FlowLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowLaw::DirectAntisymmetry(x, y) => write!(f, "g({x},{y}) != -g({y},{x})"),
            FlowLaw::TripleReversal(x, y, z) => write!(f, "T({x},{y},{z}) != -T({z},{y},{x})"),
            FlowLaw::TripleRotation(x, y, z) => write!(f, "T({x},{y},{z}) != T({y},{z},{x})"),
            FlowLaw::TripleRepeat(x, y, z) => write!(f, "T({x},{y},{z}) != 0 on a repeated state"),
            FlowLaw::TripleCocycle(a, b, c, d) => {
                write!(f, "T({a},{b},{c}) + T({a},{c},{d}) != T({b},{c},{d}) + T({b},{d},{a})")
            }
        }
    }
}

impl FlowSpec {
    /// Builds from dense index-ordered tables (`n*n` and `n*n*n` entries) and
    /// validates every law.
    pub fn from_tables(
        states: StateSet,
        direct: Vec<i64>,
        triple: Vec<i64>,
    ) -> Result<Self, RuleError> {
        let n = states.len();
        assert_eq!(direct.len(), n * n, "direct table size");
        assert_eq!(triple.len(), n * n * n, "triple table size");
        let spec = Self { states, direct, triple };
        if let Some(law) = spec.first_violation() {
            return Err(RuleError::FlowInvariantViolation(law));
        }
        Ok(spec)
    }

    pub fn from_fn(
        states: StateSet,
        g: impl Fn(State, State) -> i64,
        t: impl Fn(State, State, State) -> i64,
    ) -> Result<Self, RuleError> {
        let q = states.as_slice();
        let direct = q.iter().flat_map(|&x| q.iter().map(move |&y| (x, y))).map(|(x, y)| g(x, y)).collect();
        let mut triple = Vec::with_capacity(q.len().pow(3));
        for &x in q {
            for &y in q {
                for &z in q {
                    triple.push(t(x, y, z));
                }
            }
        }
        Self::from_tables(states, direct, triple)
    }

    /// Builds from a pair function `h`, storing only its cyclic extension
    /// `T(x,y,z) = h(x,y) + h(y,z) + h(z,x)`.
    pub fn from_pair_flows(
        states: StateSet,
        g: impl Fn(State, State) -> i64,
        h: impl Fn(State, State) -> i64,
    ) -> Result<Self, RuleError> {
        Self::from_fn(states, g, |x, y, z| h(x, y) + h(y, z) + h(z, x))
    }

    /// The flow with `g ≡ 0` and `T ≡ 0`; it realizes the identity rule.
    pub fn zero(states: StateSet) -> Self {
        let n = states.len();
        Self { states, direct: vec![0; n * n], triple: vec![0; n * n * n] }
    }

    /// The five-state family over `{0,1,2,3,4}`: `g(0,4) = 1`, `h(0,4) = beta`,
    /// every other pair zero.
    pub fn canonical(beta: i64) -> Self {
        let pair = |x: State, y: State, v: i64| match (x, y) {
            (0, 4) => v,
            (4, 0) => -v,
            _ => 0,
        };
        Self::from_pair_flows(StateSet::range(5), |x, y| pair(x, y, 1), |x, y| pair(x, y, beta))
            .expect("canonical flow satisfies its laws")
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    #[inline]
    pub(crate) fn direct_at(&self, i: usize, j: usize) -> i64 {
        self.direct[i * self.states.len() + j]
    }

    #[inline]
    pub(crate) fn triple_at(&self, i: usize, j: usize, k: usize) -> i64 {
        let n = self.states.len();
        self.triple[(i * n + j) * n + k]
    }

    fn idx(&self, s: State) -> usize {
        self.states.index_of(s).unwrap_or_else(|| panic!("state {s} not in {}", self.states))
    }

    /// `g(x, y)`: value moved from `y` into `x` per step. Panics on a state outside the alphabet.
    pub fn direct(&self, x: State, y: State) -> i64 {
        self.direct_at(self.idx(x), self.idx(y))
    }

    /// `T(x, y, z)`, the cyclic extension on a triple.
    pub fn triple(&self, x: State, y: State, z: State) -> i64 {
        self.triple_at(self.idx(x), self.idx(y), self.idx(z))
    }

    pub fn direct_table(&self) -> &[i64] {
        &self.direct
    }

    pub fn triple_table(&self) -> &[i64] {
        &self.triple
    }

    /// Cyclic extension of a word: `Σ T(q1, qi, qi+1)` for `i = 2..n-1`.
    pub fn cyc_extension(&self, word: &[State]) -> Result<i64, RuleError> {
        if word.len() < 2 {
            return Err(RuleError::WordTooShort(word.len()));
        }
        let mut ix = Vec::with_capacity(word.len());
        for &s in word {
            ix.push(self.states.index_of(s).ok_or(RuleError::StateOutOfAlphabet(s))?);
        }
        Ok(ix.windows(2).skip(1).map(|w| self.triple_at(ix[0], w[0], w[1])).sum())
    }

    /// The 4-cycle value `cyc(u,r,d,l) = T(u,r,d) + T(u,d,l)` on state indices.
    #[inline]
    pub(crate) fn four_cycle_at(&self, u: usize, r: usize, d: usize, l: usize) -> i64 {
        self.triple_at(u, r, d) + self.triple_at(u, d, l)
    }

    /// Negated triple table; realizes the left/right mirror of the rule.
    pub fn mirrored(&self) -> Self {
        Self {
            states: self.states.clone(),
            direct: self.direct.clone(),
            triple: self.triple.iter().map(|v| -v).collect(),
        }
    }

    /// True when both tables vanish.
    pub fn is_zero(&self) -> bool {
        self.direct.iter().all(|&v| v == 0) && self.triple.iter().all(|&v| v == 0)
    }

    /// Non-zero direct entries `(x, y, g)` with `x < y`.
    pub fn direct_entries(&self) -> Vec<(State, State, i64)> {
        let q = self.states.as_slice();
        let mut out = Vec::new();
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                let v = self.direct_at(i, j);
                if v != 0 {
                    out.push((q[i], q[j], v));
                }
            }
        }
        out
    }

    /// Non-zero triple entries in normal form: the smallest state first, one
    /// entry per cyclic class (the reversed class carries the negated value).
    pub fn triple_entries(&self) -> Vec<(State, State, State, i64)> {
        let q = self.states.as_slice();
        let mut out = Vec::new();
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                for k in i + 1..q.len() {
                    if j == k {
                        continue;
                    }
                    let v = self.triple_at(i, j, k);
                    if v != 0 && j < k {
                        out.push((q[i], q[j], q[k], v));
                    }
                }
            }
        }
        out
    }

    fn first_violation(&self) -> Option<FlowLaw> {
        let q = self.states.as_slice();
        let n = q.len();
        for i in 0..n {
            for j in 0..n {
                if self.direct_at(i, j) != -self.direct_at(j, i) {
                    return Some(FlowLaw::DirectAntisymmetry(q[i], q[j]));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.triple_at(i, j, k);
                    if (i == j || j == k || i == k) && v != 0 {
                        return Some(FlowLaw::TripleRepeat(q[i], q[j], q[k]));
                    }
                    if v != -self.triple_at(k, j, i) {
                        return Some(FlowLaw::TripleReversal(q[i], q[j], q[k]));
                    }
                    if v != self.triple_at(j, k, i) {
                        return Some(FlowLaw::TripleRotation(q[i], q[j], q[k]));
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let cut_a = self.triple_at(a, b, c) + self.triple_at(a, c, d);
                        let cut_b = self.triple_at(b, c, d) + self.triple_at(b, d, a);
                        if cut_a != cut_b {
                            return Some(FlowLaw::TripleCocycle(q[a], q[b], q[c], q[d]));
                        }
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_cyclic_extension_values() {
        let f = FlowSpec::canonical(1);
        assert_eq!(f.cyc_extension(&[0, 4]).unwrap(), 0);
        assert_eq!(f.cyc_extension(&[0, 4, 1]).unwrap(), 1);
        assert_eq!(f.cyc_extension(&[1, 4, 0]).unwrap(), -1);
        assert_eq!(f.cyc_extension(&[0, 0, 4, 1]).unwrap(), 1);
    }

    #[test]
    fn short_words_rejected() {
        let f = FlowSpec::canonical(1);
        assert_eq!(f.cyc_extension(&[0]), Err(RuleError::WordTooShort(1)));
        assert_eq!(f.cyc_extension(&[]), Err(RuleError::WordTooShort(0)));
        assert_eq!(f.cyc_extension(&[0, 7]), Err(RuleError::StateOutOfAlphabet(7)));
    }

    #[test]
    fn laws_are_enforced() {
        let q = StateSet::range(3);
        let bad_g = FlowSpec::from_fn(q.clone(), |x, y| if (x, y) == (0, 1) { 1 } else { 0 }, |_, _, _| 0);
        assert!(matches!(bad_g, Err(RuleError::FlowInvariantViolation(FlowLaw::DirectAntisymmetry(..)))));
        let bad_t = FlowSpec::from_fn(q, |_, _| 0, |x, y, z| if (x, y, z) == (0, 1, 2) { 1 } else { 0 });
        assert!(matches!(bad_t, Err(RuleError::FlowInvariantViolation(_))));
    }

    #[test]
    fn cocycle_law_rejects_non_extensions() {
        // T(0,4,1) = 1 but T(0,4,2) = 0: antisymmetric and rotation-invariant, yet no h has this extension
        let t = |x: State, y: State, z: State| {
            let class = |a, b, c| [(a, b, c), (b, c, a), (c, a, b)].contains(&(x, y, z));
            if class(0, 4, 1) {
                1
            } else if class(1, 4, 0) {
                -1
            } else {
                0
            }
        };
        let r = FlowSpec::from_fn(StateSet::range(5), |_, _| 0, t);
        assert!(matches!(r, Err(RuleError::FlowInvariantViolation(FlowLaw::TripleCocycle(..)))));
    }

    #[test]
    fn canonical_triples_in_normal_form() {
        let f = FlowSpec::canonical(1);
        assert_eq!(f.direct_entries(), vec![(0, 4, 1)]);
        // T(0,4,x) = h(0,4) = 1 for x in {1,2,3}; normal form lists (0,x,4) = -1
        assert_eq!(f.triple_entries(), vec![(0, 1, 4, -1), (0, 2, 4, -1), (0, 3, 4, -1)]);
        assert_eq!(f.triple(0, 4, 2), 1);
        assert!(FlowSpec::canonical(0).triple_entries().is_empty());
    }

    #[test]
    fn mirror_negates_triples() {
        assert_eq!(FlowSpec::canonical(1).mirrored(), FlowSpec::canonical(-1));
    }
}
