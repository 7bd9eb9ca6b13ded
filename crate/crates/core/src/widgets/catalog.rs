//! The frozen widget catalog for the `beta = 1`, `q0 = 0` rule, plus the
//! wire geometry the compiler routes with.
//!
//! A wire is a track of state 2 with a wall of state 2 on its left. A signal
//! `1,4,4` (4s leading) crawls along it at speed 1/2; its `1` sits on every
//! other track cell at every fourth step. Counting track cells from a cell
//! where the `1` sits, corners must be placed at even indices.

use num_rational::Ratio;

use super::{load_pattern, Assignment, Direction, Pattern, Port, Widget};
use crate::config::{Cell, Configuration};
use crate::state::State;

const AND: &str = include_str!("../../patterns/and.rnca");
const ANDNOT: &str = include_str!("../../patterns/andnot.rnca");
const BRANCH: &str = include_str!("../../patterns/branch.rnca");

/// Steps from the `1` on the last track cell before a clockwise corner to
/// the `1` on the first cell after it.
pub const CW_CORNER_LATENCY: u64 = 3;
/// As [`CW_CORNER_LATENCY`], for the counterclockwise corner.
pub const CCW_CORNER_LATENCY: u64 = 14;

/// Extra cells of the counterclockwise corner as `(along, beside, state)`
/// relative to the last incoming track cell; `beside` counts to the left.
const CCW_CELLS: [(i32, i32, State); 11] = [
    (1, 0, 3),
    (2, 0, 2),
    (2, -1, 2),
    (1, 1, 2),
    (0, 2, 2),
    (1, 2, 3),
    (0, 3, 2),
    (1, 3, 3),
    (0, 4, 2),
    (1, 4, 1),
    (0, 5, 2),
];

/// Track and wall cells of a straight wire of `len` track cells.
pub fn wire_cells(start: Cell, dir: Direction, len: u32) -> Vec<(Cell, State)> {
    (0..len as i32).flat_map(|i| [(dir.offset(start, i, 0), 2), (dir.offset(start, i, 1), 2)]).collect()
}

/// The clockwise corner after track cell `last`, heading `dir`: its extra
/// cells, and the first track cell and heading of the outgoing wire.
pub fn cw_corner(last: Cell, dir: Direction) -> (Vec<(Cell, State)>, Cell, Direction) {
    let out = dir.right();
    let extra = vec![(out.offset(last, 1, 0), 2)];
    (extra, out.offset(dir.offset(last, -1, 0), 2, 0), out)
}

/// The counterclockwise corner after track cell `last`, heading `dir`.
pub fn ccw_corner(last: Cell, dir: Direction) -> (Vec<(Cell, State)>, Cell, Direction) {
    (corner_ccw_cells(last, dir), dir.offset(last, 1, 6), dir.left())
}

pub fn corner_ccw_cells(last: Cell, dir: Direction) -> Vec<(Cell, State)> {
    CCW_CELLS.iter().map(|&(a, b, s)| (dir.offset(last, a, b), s)).collect()
}

/// A straight wire carrying a signal over `len` cells (even, so the signal
/// is in phase at the far port).
pub fn red_wire(len: u32) -> Widget {
    let grid = Configuration::from_cells(0, wire_cells(Cell::new(0, 0), Direction::PosX, len + 5));
    let ports = vec![
        Port::input("A", Cell::new(0, 0), Direction::PosX),
        Port::output("O", Cell::new(len as i32, 0), Direction::PosX, 2 * len as u64),
    ];
    let mut pattern = Pattern::framed(format!("wire-{len}"), 1, grid, ports).expect("wire ports lie on the wire");
    pattern.notes = vec!["O = A".into(), super::SINGLE_USE_NOTE.into()];
    Widget::from_fn(pattern, identity).with_speed(Ratio::new(1, 2)).single_use()
}

/// Red tail between the end of a green segment and the output port.
const GREEN_TAIL: u32 = 8;

/// A wire whose first `len` cells after the injection stamp are green
/// (track state 3). The signal crosses them at speed 1, then continues at
/// speed 1/2 over a fixed red tail; `len` must be even.
pub fn green_wire(len: u32) -> Widget {
    let total = 3 + len + GREEN_TAIL + 5;
    let mut grid = Configuration::from_cells(0, wire_cells(Cell::new(0, 0), Direction::PosX, total));
    for x in 3..3 + len as i32 {
        grid.set(Cell::new(x, 0), 3);
    }
    let out = 2 + len + GREEN_TAIL;
    let ports = vec![
        Port::input("A", Cell::new(0, 0), Direction::PosX),
        Port::output("O", Cell::new(out as i32, 0), Direction::PosX, (len + 2 * (2 + GREEN_TAIL)) as u64),
    ];
    let mut pattern = Pattern::framed(format!("green-{len}"), 1, grid, ports).expect("green wire ports lie on the wire");
    pattern.notes = vec!["O = A".into()];
    Widget::from_fn(pattern, identity).with_speed(Ratio::from_integer(1))
}

/// A wire of `before` cells, a corner, and `after` cells. `before` must be
/// odd so the corner sits at an even index.
pub fn corner_widget(clockwise: bool, before: u32, after: u32) -> Widget {
    let mut cells = wire_cells(Cell::new(0, 0), Direction::PosX, before);
    let last = Cell::new(before as i32 - 1, 0);
    let (extra, start, dir) = if clockwise { cw_corner(last, Direction::PosX) } else { ccw_corner(last, Direction::PosX) };
    cells.extend(extra);
    cells.extend(wire_cells(start, dir, after + 5));
    let corner = if clockwise { CW_CORNER_LATENCY } else { CCW_CORNER_LATENCY };
    let latency = 2 * (before as u64 - 1) + corner + 2 * after as u64;
    let ports = vec![
        Port::input("A", Cell::new(0, 0), Direction::PosX),
        Port::output("O", dir.offset(start, after as i32, 0), dir, latency),
    ];
    let name = if clockwise { "corner-cw" } else { "corner-ccw" };
    let mut pattern = Pattern::framed(name, 1, Configuration::from_cells(0, cells), ports).expect("corner ports lie on the wire");
    pattern.notes = vec!["O = A".into()];
    Widget::from_fn(pattern, identity)
}

fn identity(a: &Assignment) -> Assignment {
    [("O".to_string(), a["A"])].into()
}

fn frozen(text: &str) -> Pattern {
    load_pattern(text).expect("frozen catalog patterns parse")
}

/// One input `I` duplicated onto outputs `R` (straight on) and `D` (turning
/// clockwise).
pub fn branch() -> Widget {
    Widget::from_fn(frozen(BRANCH), |a| [("R".to_string(), a["I"]), ("D".to_string(), a["I"])].into())
}

/// `O = A and B`; `A` enters along `+x`, `B` from below along `+y`.
pub fn gate_and() -> Widget {
    Widget::from_fn(frozen(AND), |a| [("O".to_string(), a["A"] && a["B"])].into())
}

/// `O = (not A) and B`, same ports as [`gate_and`].
pub fn gate_andnot() -> Widget {
    Widget::from_fn(frozen(ANDNOT), |a| [("O".to_string(), !a["A"] && a["B"])].into())
}

/// Everything the circuit compiler needs, for one rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    pub beta: i64,
    pub branch: Option<Widget>,
    pub and: Option<Widget>,
    pub andnot: Option<Widget>,
}

impl Catalog {
    /// The frozen widgets for `beta = 1`.
    pub fn standard() -> Self {
        Catalog { beta: 1, branch: Some(branch()), and: Some(gate_and()), andnot: Some(gate_andnot()) }
    }

    pub fn widgets(&self) -> Vec<&Widget> {
        [&self.branch, &self.and, &self.andnot].into_iter().flatten().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::{canonical_rule, mirror_rule};
    use crate::widgets::{inject, measure_speed, validate_widget};

    fn rule() -> crate::rule::Rule {
        canonical_rule(1, 0).unwrap()
    }

    fn assert_valid(w: &Widget, horizon: u64) {
        let report = validate_widget(&rule(), w, horizon).unwrap();
        assert!(report.verdict, "{report}");
    }

    #[test]
    fn frozen_gates_match_their_tables() {
        assert_valid(&gate_and(), 120);
        assert_valid(&gate_andnot(), 120);
    }

    #[test]
    fn branch_copies_its_input() {
        assert_valid(&branch(), 150);
    }

    #[test]
    fn wires_and_corners_validate() {
        for len in [0, 2, 8, 16] {
            assert_valid(&red_wire(len), 2 * len as u64 + 40);
            assert_valid(&green_wire(len), len as u64 + 60);
        }
        for clockwise in [true, false] {
            assert_valid(&corner_widget(clockwise, 5, 6), 80);
        }
    }

    #[test]
    fn wire_speeds() {
        assert_eq!(measure_speed(&rule(), red_wire, &[8, 16, 24]).unwrap(), Ratio::new(1, 2));
        assert_eq!(measure_speed(&rule(), green_wire, &[8, 16, 24]).unwrap(), Ratio::from_integer(1));
    }

    #[test]
    fn traversed_wire_differs_from_bare_wire() {
        let w = red_wire(8);
        let on = [("A".to_string(), true)].into();
        let mut config = inject(&w.pattern, &on).unwrap();
        for _ in 0..40 {
            config = crate::config::step(&rule(), &config).unwrap();
        }
        assert_ne!(config, w.pattern.grid);
        assert_eq!(config.relative_sum(), w.pattern.grid.relative_sum() + 3);
    }

    #[test]
    fn mirrored_catalog_validates_under_mirrored_rule() {
        let mirrored = mirror_rule(&rule());
        for w in Catalog::standard().widgets() {
            let report = validate_widget(&mirrored, &w.mirrored(), 150).unwrap();
            assert!(report.verdict, "{report}");
        }
    }
}
