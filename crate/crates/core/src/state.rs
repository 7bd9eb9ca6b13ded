//! State alphabets and von Neumann neighborhoods.

use std::fmt;

use crate::rule::RuleError;

/// A cell state. States are plain integers so that sums are meaningful.
pub type State = i64;

/// Ordered, duplicate-free, non-empty set of integer states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateSet {
    states: Vec<State>,
    // dense index lookup over [min, max]; u8::MAX marks a gap
    lut: Vec<u8>,
}

impl StateSet {
    pub fn new(states: impl IntoIterator<Item = State>) -> Result<Self, RuleError> {
        let mut states: Vec<State> = states.into_iter().collect();
        states.sort_unstable();
        states.dedup();
        if states.is_empty() {
            return Err(RuleError::EmptyAlphabet);
        }
        if states.len() > 16 {
            return Err(RuleError::AlphabetTooLarge(states.len()));
        }
        let min = states[0];
        let span = (states[states.len() - 1] - min) as usize + 1;
        if span > 1 << 16 {
            return Err(RuleError::AlphabetTooLarge(span));
        }
        let mut lut = vec![u8::MAX; span];
        for (i, &s) in states.iter().enumerate() {
            lut[(s - min) as usize] = i as u8;
        }
        Ok(Self { states, lut })
    }

    /// `{0, 1, ..., n - 1}`.
    pub fn range(n: usize) -> Self {
        Self::new(0..n as State).expect("non-empty range")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> State {
        self.states[0]
    }

    pub fn max(&self) -> State {
        self.states[self.states.len() - 1]
    }

    pub fn as_slice(&self) -> &[State] {
        &self.states
    }

    pub fn iter(&self) -> impl Iterator<Item = State> + '_ {
        self.states.iter().copied()
    }

    pub fn contains(&self, s: State) -> bool {
        self.index_of(s).is_some()
    }

    /// Position of `s` in ascending order.
    #[inline]
    pub fn index_of(&self, s: State) -> Option<usize> {
        let off = s.checked_sub(self.states[0])?;
        if off < 0 {
            return None;
        }
        match self.lut.get(off as usize) {
            Some(&i) if i != u8::MAX => Some(i as usize),
            _ => None,
        }
    }

    #[inline]
    pub fn state_at(&self, index: usize) -> State {
        self.states[index]
    }

    /// Greatest common divisor of the pairwise differences (0 for a singleton).
    pub fn difference_gcd(&self) -> State {
        let min = self.min();
        self.states.iter().fold(0, |acc, &s| gcd(acc, s - min))
    }

    /// True when the minimum is 0 and the differences have gcd 1 (or the set is `{0}`).
    pub fn is_normalized(&self) -> bool {
        self.min() == 0 && (self.len() == 1 || self.difference_gcd() == 1)
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.states.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn gcd(a: State, b: State) -> State {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The five states seen by a cell: itself, then up, right, down, left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Neighborhood {
    pub c: State,
    pub u: State,
    pub r: State,
    pub d: State,
    pub l: State,
}

impl Neighborhood {
    pub const fn new(c: State, u: State, r: State, d: State, l: State) -> Self {
        Self { c, u, r, d, l }
    }

    pub const fn uniform(q: State) -> Self {
        Self::new(q, q, q, q, q)
    }

    /// Quarter-turn of the outer ring: `(c,u,r,d,l) -> (c,r,d,l,u)`.
    pub const fn rotated(self) -> Self {
        Self::new(self.c, self.r, self.d, self.l, self.u)
    }

    /// Left/right exchange: `(c,u,r,d,l) -> (c,u,l,d,r)`.
    pub const fn mirrored(self) -> Self {
        Self::new(self.c, self.u, self.l, self.d, self.r)
    }

    pub const fn as_array(self) -> [State; 5] {
        [self.c, self.u, self.r, self.d, self.l]
    }
}

impl From<[State; 5]> for Neighborhood {
    fn from(a: [State; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{})", self.c, self.u, self.r, self.d, self.l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_deduplicated() {
        let q = StateSet::new([4, 0, 2, 2]).unwrap();
        assert_eq!(q.as_slice(), &[0, 2, 4]);
        assert_eq!(q.index_of(2), Some(1));
        assert_eq!(q.index_of(3), None);
        assert_eq!(q.index_of(-1), None);
        assert_eq!(q.index_of(5), None);
        assert_eq!(q.difference_gcd(), 2);
        assert!(!q.is_normalized());
    }

    #[test]
    fn empty_rejected() {
        assert!(StateSet::new([]).is_err());
    }

    #[test]
    fn normalized_forms() {
        assert!(StateSet::range(5).is_normalized());
        assert!(StateSet::range(1).is_normalized());
        assert!(!StateSet::new([10, 14, 18]).unwrap().is_normalized());
    }

    #[test]
    fn rotation_has_order_four() {
        let n = Neighborhood::new(0, 1, 2, 3, 4);
        assert_eq!(n.rotated(), Neighborhood::new(0, 2, 3, 4, 1));
        assert_eq!(n.rotated().rotated().rotated().rotated(), n);
        assert_eq!(n.mirrored().mirrored(), n);
    }
}
