use std::collections::HashSet;

use rayon::prelude::*;

use super::decompose::DirectFlow;
use super::AnalysisError;
use crate::flow::FlowSpec;
use crate::rule::build_rule;
use crate::state::{State, StateSet};

/// Default cap on search nodes for one alphabet.
pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

/// Alphabets larger than this are refused outright.
const MAX_STATES: usize = 6;

/// A pair with non-zero direct flow `alpha = g(a, b)`. Returned by
/// [`lemma2_closure_check`] when the progressions `a, a+alpha, .., a+4alpha`
/// and `b, b-alpha, .., b-4alpha` leave the alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowWitness {
    pub a: State,
    pub b: State,
    pub alpha: i64,
}

fn progressions_fit(q: &StateSet, a: State, b: State, alpha: i64) -> bool {
    (0..=4).all(|k| q.contains(a + k * alpha) && q.contains(b - k * alpha))
}

/// Every pair `a < b` whose non-zero flow cannot be realized inside `q`.
pub fn lemma2_closure_check(g: &DirectFlow, q: &StateSet) -> Vec<FlowWitness> {
    let s = g.states().as_slice();
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let alpha = g.at(i, j);
            if alpha != 0 && !progressions_fit(q, s[i], s[j], alpha) {
                out.push(FlowWitness { a: s[i], b: s[j], alpha });
            }
        }
    }
    out
}

/// All flow certificates over `states` whose rule is closed, one per distinct
/// rule table. The trivial rule is always among them.
pub fn enumerate_rnca(states: &StateSet) -> Result<Vec<FlowSpec>, AnalysisError> {
    enumerate_rnca_with_budget(states, DEFAULT_SEARCH_BUDGET)
}

pub fn enumerate_rnca_with_budget(states: &StateSet, budget: u64) -> Result<Vec<FlowSpec>, AnalysisError> {
    if states.len() > MAX_STATES {
        return Err(AnalysisError::BudgetExceeded { needed: states.len() as u64, budget: MAX_STATES as u64 });
    }
    let mut search = Search::new(states, budget);
    search.direct(0)?;
    let mut out = search.found;
    out.sort_by(|a, b| (a.direct_table(), a.triple_table()).cmp(&(b.direct_table(), b.triple_table())));
    Ok(out)
}

struct Search<'a> {
    states: &'a StateSet,
    n: usize,
    pairs: Vec<(usize, usize)>,
    g: Vec<i64>,
    /// one representative orientation `(i, j, k)`, `i < j < k`, per triple class
    classes: Vec<(usize, usize, usize)>,
    t: Vec<Option<i64>>,
    nodes: u64,
    budget: u64,
    seen: HashSet<Vec<u8>>,
    found: Vec<FlowSpec>,
}

impl<'a> Search<'a> {
    fn new(states: &'a StateSet, budget: u64) -> Self {
        let n = states.len();
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut classes = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    classes.push((i, j, k));
                }
            }
        }
        let mut t = vec![None; n * n * n];
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || y == z || x == z {
                        t[(x * n + y) * n + z] = Some(0);
                    }
                }
            }
        }
        Self {
            states,
            n,
            pairs,
            g: vec![0; n * n],
            classes,
            t,
            nodes: 0,
            budget,
            seen: HashSet::new(),
            found: Vec::new(),
        }
    }

    fn tick(&mut self) -> Result<(), AnalysisError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(AnalysisError::BudgetExceeded { needed: self.nodes, budget: self.budget });
        }
        Ok(())
    }

    fn q(&self, i: usize) -> State {
        self.states.state_at(i)
    }

    /// Candidate `g(x, y)` values: `x + 4g` and `y - 4g` must be states, and
    /// the full progressions must fit.
    fn direct_candidates(&self, i: usize, j: usize) -> Vec<i64> {
        let (a, b) = (self.q(i), self.q(j));
        let span = (self.states.max() - self.states.min()) / 4;
        (-span..=span).filter(|&alpha| alpha == 0 || progressions_fit(self.states, a, b, alpha)).collect()
    }

    fn direct(&mut self, p: usize) -> Result<(), AnalysisError> {
        if p == self.pairs.len() {
            return self.triples(0);
        }
        let (i, j) = self.pairs[p];
        let n = self.n;
        for alpha in self.direct_candidates(i, j) {
            self.tick()?;
            self.g[i * n + j] = alpha;
            self.g[j * n + i] = -alpha;
            self.direct(p + 1)?;
        }
        self.g[i * n + j] = 0;
        self.g[j * n + i] = 0;
        Ok(())
    }

    fn ring_flow(&self, c: usize, ring: [usize; 4]) -> i64 {
        ring.iter().map(|&v| self.g[c * self.n + v]).sum()
    }

    /// Values of `T(i,j,k)` keeping `f(c, x,x,y,z)` in the alphabet for every
    /// center and every doubled ring through the class.
    fn triple_candidates(&self, (i, j, k): (usize, usize, usize)) -> Vec<i64> {
        let rings: [([usize; 4], i64); 6] = [
            ([i, i, j, k], 1),
            ([j, j, k, i], 1),
            ([k, k, i, j], 1),
            ([i, i, k, j], -1),
            ([k, k, j, i], -1),
            ([j, j, i, k], -1),
        ];
        let q0 = self.q(0);
        let base = self.ring_flow(0, rings[0].0);
        let mut cands: Vec<i64> = self.states.iter().map(|s| s - q0 - base).collect();
        cands.retain(|&v| {
            (0..self.n).all(|c| {
                rings.iter().all(|&(ring, sign)| self.states.contains(self.q(c) + self.ring_flow(c, ring) + sign * v))
            })
        });
        cands
    }

    fn set_class(&mut self, (i, j, k): (usize, usize, usize), v: Option<i64>) {
        let n = self.n;
        let neg = v.map(|x| -x);
        for (x, y, z, val) in [(i, j, k, v), (j, k, i, v), (k, i, j, v), (k, j, i, neg), (j, i, k, neg), (i, k, j, neg)] {
            self.t[(x * n + y) * n + z] = val;
        }
    }

    /// Every `f` value whose two triples are already fixed stays in the
    /// alphabet, and every fully fixed 4-cycle has a cut-independent value.
    fn partial_closure(&self) -> bool {
        let n = self.n;
        let t = |x: usize, y: usize, z: usize| self.t[(x * n + y) * n + z];
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        if let (Some(abc), Some(acd), Some(bcd), Some(bda)) = (t(a, b, c), t(a, c, d), t(b, c, d), t(b, d, a)) {
                            if abc + acd != bcd + bda {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        for u in 0..n {
            for r in 0..n {
                for d in 0..n {
                    let Some(a) = t(u, r, d) else { continue };
                    for l in 0..n {
                        let Some(b) = t(u, d, l) else { continue };
                        let ring = [u, r, d, l];
                        if !(0..n).all(|c| self.states.contains(self.q(c) + self.ring_flow(c, ring) + a + b)) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn triples(&mut self, p: usize) -> Result<(), AnalysisError> {
        if p == self.classes.len() {
            return self.leaf();
        }
        let class = self.classes[p];
        for v in self.triple_candidates(class) {
            self.tick()?;
            self.set_class(class, Some(v));
            if self.partial_closure() {
                self.triples(p + 1)?;
            }
        }
        self.set_class(class, None);
        Ok(())
    }

    fn leaf(&mut self) -> Result<(), AnalysisError> {
        let triple = self.t.iter().map(|v| v.expect("all classes assigned")).collect();
        let Ok(flow) = FlowSpec::from_tables(self.states.clone(), self.g.clone(), triple) else {
            return Ok(());
        };
        if let Ok(rule) = build_rule(&flow, self.states.min()) {
            if self.seen.insert(rule.index_table().to_vec()) {
                self.found.push(flow);
            }
        }
        Ok(())
    }
}

/// Normalized alphabets inside `{0..=max_range}` with at most `max_size`
/// states: minimum 0 and difference gcd 1 (or `{0}`).
pub fn normalized_subsets(max_range: State, max_size: usize) -> Vec<StateSet> {
    let mut out = vec![StateSet::range(1)];
    let rest: Vec<State> = (1..=max_range).collect();
    let mut chosen = vec![0];
    fn extend(rest: &[State], max_size: usize, chosen: &mut Vec<State>, out: &mut Vec<StateSet>) {
        for (k, &s) in rest.iter().enumerate() {
            chosen.push(s);
            let q = StateSet::new(chosen.iter().copied()).expect("non-empty");
            if q.is_normalized() {
                out.push(q);
            }
            if chosen.len() < max_size {
                extend(&rest[k + 1..], max_size, chosen, out);
            }
            chosen.pop();
        }
    }
    extend(&rest, max_size, &mut chosen, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallTrivialityReport {
    pub max_range: State,
    pub sets_checked: usize,
    /// Every non-trivial certificate found; empty when small alphabets are all trivial.
    pub nontrivial: Vec<(StateSet, FlowSpec)>,
}

/// Enumerates every normalized alphabet of at most four states inside
/// `{0..=max_range}` and collects non-trivial certificates.
pub fn verify_small_triviality(max_range: State) -> Result<SmallTrivialityReport, AnalysisError> {
    verify_small_triviality_with_budget(max_range, DEFAULT_SEARCH_BUDGET)
}

pub fn verify_small_triviality_with_budget(max_range: State, budget: u64) -> Result<SmallTrivialityReport, AnalysisError> {
    let sets = normalized_subsets(max_range, 4);
    let results: Vec<Result<Vec<(StateSet, FlowSpec)>, AnalysisError>> = sets
        .par_iter()
        .map(|q| {
            let flows = enumerate_rnca_with_budget(q, budget)?;
            Ok(flows.into_iter().filter(|f| !f.is_zero()).map(|f| (q.clone(), f)).collect())
        })
        .collect();
    let mut nontrivial = Vec::new();
    for r in results {
        nontrivial.extend(r?);
    }
    Ok(SmallTrivialityReport { max_range, sets_checked: sets.len(), nontrivial })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_check_examples() {
        let q = StateSet::range(5);
        let g = DirectFlow::from_fn(q.clone(), |x, y| match (x, y) {
            (0, 4) => 1,
            (4, 0) => -1,
            _ => 0,
        });
        assert!(lemma2_closure_check(&g, &q).is_empty());
        let g = DirectFlow::from_fn(q.clone(), |x, y| match (x, y) {
            (0, 3) => 1,
            (3, 0) => -1,
            _ => 0,
        });
        assert_eq!(lemma2_closure_check(&g, &q), vec![FlowWitness { a: 0, b: 3, alpha: 1 }]);
    }

    #[test]
    fn four_states_refute_every_flow() {
        let q = StateSet::range(4);
        for a in 0..4 {
            for b in a + 1..4 {
                for alpha in (-3..=3).filter(|&v| v != 0) {
                    let g = DirectFlow::from_fn(q.clone(), |x, y| {
                        if (x, y) == (a, b) {
                            alpha
                        } else if (x, y) == (b, a) {
                            -alpha
                        } else {
                            0
                        }
                    });
                    assert_eq!(lemma2_closure_check(&g, &q).len(), 1, "g({a},{b}) = {alpha}");
                }
            }
        }
    }

    #[test]
    fn five_states_give_four_rules() {
        let flows = enumerate_rnca(&StateSet::range(5)).unwrap();
        assert_eq!(flows.len(), 4);
        let mut betas: Vec<i64> = flows.iter().filter(|f| !f.is_zero()).map(|f| f.triple(0, 4, 1)).collect();
        betas.sort();
        assert_eq!(betas, vec![-1, 0, 1]);
        for f in flows.iter().filter(|f| !f.is_zero()) {
            assert_eq!(f, &FlowSpec::canonical(f.triple(0, 4, 1)));
        }
    }

    #[test]
    fn tiny_alphabets_are_trivial() {
        for q in [StateSet::range(1), StateSet::range(4), StateSet::new([0, 4]).unwrap()] {
            let flows = enumerate_rnca(&q).unwrap();
            assert_eq!(flows.len(), 1, "{q}");
            assert!(flows[0].is_zero());
        }
    }

    #[test]
    fn normalized_subsets_are_normalized() {
        let sets = normalized_subsets(4, 4);
        assert!(sets.iter().all(|q| q.is_normalized() && q.len() <= 4));
        assert!(!sets.contains(&StateSet::new([0, 4]).unwrap()));
        assert!(sets.contains(&StateSet::new([0, 3, 4]).unwrap()));
        assert!(sets.contains(&StateSet::range(1)));
    }

    #[test]
    fn budget_is_enforced() {
        let err = enumerate_rnca_with_budget(&StateSet::range(5), 3).unwrap_err();
        assert!(matches!(err, AnalysisError::BudgetExceeded { budget: 3, .. }));
    }
}
