//! Finite configurations over a quiescent background and the global step.
//!
//! Coordinates: `x` grows to the right, `y` grows upward, so the `u`
//! neighbor of `(x, y)` is `(x, y + 1)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::rule::{Rule, RuleError};
use crate::state::{State, StateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub const fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Inclusive rectangle of cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BBox {
    pub min_x: i32,
    pub min_y: i32,
    pub max_x: i32,
    pub max_y: i32,
}

impl BBox {
    /// Smallest rectangle holding every cell; `None` for no cells.
    pub fn around(cells: impl IntoIterator<Item = Cell>) -> Option<BBox> {
        let mut it = cells.into_iter();
        let first = it.next()?;
        let mut b = BBox { min_x: first.x, min_y: first.y, max_x: first.x, max_y: first.y };
        for c in it {
            b.min_x = b.min_x.min(c.x);
            b.max_x = b.max_x.max(c.x);
            b.min_y = b.min_y.min(c.y);
            b.max_y = b.max_y.max(c.y);
        }
        Some(b)
    }

    pub fn width(&self) -> u32 {
        (self.max_x - self.min_x + 1) as u32
    }

    pub fn height(&self) -> u32 {
        (self.max_y - self.min_y + 1) as u32
    }

    pub fn contains(&self, c: Cell) -> bool {
        (self.min_x..=self.max_x).contains(&c.x) && (self.min_y..=self.max_y).contains(&c.y)
    }

    pub fn contains_box(&self, other: &BBox) -> bool {
        self.contains(Cell::new(other.min_x, other.min_y)) && self.contains(Cell::new(other.max_x, other.max_y))
    }

    pub fn grow(&self, by: i32) -> BBox {
        BBox { min_x: self.min_x - by, min_y: self.min_y - by, max_x: self.max_x + by, max_y: self.max_y + by }
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }
}

/// A configuration in which all but finitely many cells are quiescent.
/// Only non-quiescent cells are stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    quiescent: State,
    cells: BTreeMap<Cell, State>,
}

impl Configuration {
    pub fn new(quiescent: State) -> Self {
        Self { quiescent, cells: BTreeMap::new() }
    }

    pub fn from_cells(quiescent: State, cells: impl IntoIterator<Item = (Cell, State)>) -> Self {
        let mut config = Self::new(quiescent);
        for (c, s) in cells {
            config.set(c, s);
        }
        config
    }

    pub fn quiescent(&self) -> State {
        self.quiescent
    }

    pub fn get(&self, c: Cell) -> State {
        self.cells.get(&c).copied().unwrap_or(self.quiescent)
    }

    /// Writes a state; writing the quiescent state erases the cell.
    pub fn set(&mut self, c: Cell, s: State) {
        if s == self.quiescent {
            self.cells.remove(&c);
        } else {
            self.cells.insert(c, s);
        }
    }

    /// Non-quiescent cells in `(x, y)` order.
    pub fn cells(&self) -> impl ExactSizeIterator<Item = (Cell, State)> + '_ {
        self.cells.iter().map(|(&c, &s)| (c, s))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Smallest rectangle holding every non-quiescent cell.
    pub fn bbox(&self) -> Option<BBox> {
        BBox::around(self.cells.keys().copied())
    }

    /// `(width, height)`; `(0, 0)` when empty.
    pub fn dimensions(&self) -> (u32, u32) {
        self.bbox().map_or((0, 0), |b| (b.width(), b.height()))
    }

    /// `Σ (q - q0)` over all cells.
    pub fn relative_sum(&self) -> i64 {
        self.cells.values().map(|&s| s - self.quiescent).sum()
    }

    pub fn translated(&self, dx: i32, dy: i32) -> Self {
        Self { quiescent: self.quiescent, cells: self.cells.iter().map(|(c, &s)| (c.offset(dx, dy), s)).collect() }
    }

    /// Reflection through the vertical axis `x = 0`.
    pub fn mirrored(&self) -> Self {
        Self { quiescent: self.quiescent, cells: self.cells.iter().map(|(c, &s)| (Cell::new(-c.x, c.y), s)).collect() }
    }

    /// Quarter turn counterclockwise about the origin: `(x, y) -> (-y, x)`.
    pub fn rotated(&self) -> Self {
        Self { quiescent: self.quiescent, cells: self.cells.iter().map(|(c, &s)| (Cell::new(-c.y, c.x), s)).collect() }
    }

    pub fn check_alphabet(&self, states: &StateSet) -> Result<(), RuleError> {
        match self.cells.values().find(|&&s| !states.contains(s)) {
            Some(&s) => Err(RuleError::StateOutOfAlphabet(s)),
            None => Ok(()),
        }
    }
}

/// Applies the global transition once.
pub fn step(rule: &Rule, config: &Configuration) -> Result<Configuration, RuleError> {
    if config.quiescent != rule.quiescent() {
        return Err(RuleError::AlphabetMismatch { expected: rule.quiescent(), found: config.quiescent });
    }
    config.check_alphabet(rule.states())?;
    let Some(bbox) = config.bbox() else {
        return Ok(config.clone());
    };
    let window = bbox.grow(2);
    if window.area() <= 16 * (config.len() as u64 + 16) {
        Ok(step_dense(rule, config, window))
    } else {
        Ok(step_sparse(rule, config))
    }
}

fn step_dense(rule: &Rule, config: &Configuration, window: BBox) -> Configuration {
    let states = rule.states();
    let q0 = states.index_of(rule.quiescent()).expect("quiescent in alphabet");
    let w = window.width() as usize;
    let h = window.height() as usize;
    let mut grid = vec![q0; w * h];
    for (&c, &s) in &config.cells {
        let i = (c.y - window.min_y) as usize * w + (c.x - window.min_x) as usize;
        grid[i] = states.index_of(s).expect("checked alphabet");
    }
    let mut out = Configuration::new(config.quiescent);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let v = rule.lookup_indices(grid[i], grid[i + w], grid[i + 1], grid[i - w], grid[i - 1]);
            if v != q0 {
                out.cells.insert(
                    Cell::new(x as i32 + window.min_x, y as i32 + window.min_y),
                    states.state_at(v),
                );
            }
        }
    }
    out
}

fn step_sparse(rule: &Rule, config: &Configuration) -> Configuration {
    let states = rule.states();
    let idx = |c: Cell| states.index_of(config.get(c)).expect("checked alphabet");
    let mut out = Configuration::new(config.quiescent);
    let mut seen = std::collections::BTreeSet::new();
    for &c in config.cells.keys() {
        for (dx, dy) in [(0, 0), (0, 1), (1, 0), (0, -1), (-1, 0)] {
            let t = c.offset(dx, dy);
            if !seen.insert(t) {
                continue;
            }
            let v = rule.lookup_indices(idx(t), idx(t.offset(0, 1)), idx(t.offset(1, 0)), idx(t.offset(0, -1)), idx(t.offset(-1, 0)));
            out.set(t, states.state_at(v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::canonical_rule;

    #[test]
    fn quiescent_cells_are_not_stored() {
        let mut c = Configuration::new(2);
        c.set(Cell::new(0, 0), 2);
        assert!(c.is_empty());
        c.set(Cell::new(1, 1), 4);
        assert_eq!(c.len(), 1);
        c.set(Cell::new(1, 1), 2);
        assert!(c.is_empty());
        assert_eq!(c.dimensions(), (0, 0));
        assert_eq!(c.bbox(), None);
    }

    #[test]
    fn single_four_spreads_to_neighbors() {
        let rule = canonical_rule(1, 0).unwrap();
        let c = Configuration::from_cells(0, [(Cell::new(0, 0), 4)]);
        let next = step(&rule, &c).unwrap();
        let expected = Configuration::from_cells(
            0,
            [(Cell::new(0, 1), 1), (Cell::new(1, 0), 1), (Cell::new(0, -1), 1), (Cell::new(-1, 0), 1)],
        );
        assert_eq!(next, expected);
        assert_eq!(next.relative_sum(), 4);
    }

    #[test]
    fn empty_is_fixed() {
        let rule = canonical_rule(1, 0).unwrap();
        let c = Configuration::new(0);
        assert_eq!(step(&rule, &c).unwrap(), c);
    }

    #[test]
    fn beta_zero_middle_state_is_permanent() {
        let rule = canonical_rule(0, 0).unwrap();
        let c = Configuration::from_cells(0, [(Cell::new(3, -2), 2)]);
        assert_eq!(step(&rule, &c).unwrap(), c);
    }

    #[test]
    fn mismatched_quiescent_rejected() {
        let rule = canonical_rule(1, 0).unwrap();
        let c = Configuration::new(2);
        assert_eq!(step(&rule, &c), Err(RuleError::AlphabetMismatch { expected: 0, found: 2 }));
        let bad = Configuration::from_cells(0, [(Cell::new(0, 0), 7)]);
        assert_eq!(step(&rule, &bad), Err(RuleError::StateOutOfAlphabet(7)));
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let rule = canonical_rule(1, 0).unwrap();
        let c = Configuration::from_cells(
            0,
            [(Cell::new(0, 0), 4), (Cell::new(1, 0), 2), (Cell::new(40, 40), 4), (Cell::new(40, 41), 1)],
        );
        let sparse = step_sparse(&rule, &c);
        let dense = step_dense(&rule, &c, c.bbox().unwrap().grow(2));
        assert_eq!(sparse, dense);
        assert_eq!(step(&rule, &c).unwrap(), dense);
    }
}
