//! Patterns: configuration fragments with named ports, and their text format.

use std::collections::BTreeSet;
use std::fmt;

use super::WidgetError;
use crate::config::{BBox, Cell, Configuration};
use crate::state::State;

/// A unit step in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    PosX,
    NegX,
    PosY,
    NegY,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::PosX, Direction::PosY, Direction::NegX, Direction::NegY];

    pub const fn delta(self) -> (i32, i32) {
        match self {
            Direction::PosX => (1, 0),
            Direction::NegX => (-1, 0),
            Direction::PosY => (0, 1),
            Direction::NegY => (0, -1),
        }
    }

    /// Quarter turn counterclockwise.
    pub const fn left(self) -> Direction {
        match self {
            Direction::PosX => Direction::PosY,
            Direction::PosY => Direction::NegX,
            Direction::NegX => Direction::NegY,
            Direction::NegY => Direction::PosX,
        }
    }

    /// Quarter turn clockwise.
    pub const fn right(self) -> Direction {
        self.left().left().left()
    }

    pub const fn mirrored(self) -> Direction {
        match self {
            Direction::PosX => Direction::NegX,
            Direction::NegX => Direction::PosX,
            d => d,
        }
    }

    /// The cell `along` steps ahead and `beside` steps to the left of `from`.
    pub fn offset(self, from: Cell, along: i32, beside: i32) -> Cell {
        let (dx, dy) = self.delta();
        let (lx, ly) = self.left().delta();
        from.offset(dx * along + lx * beside, dy * along + ly * beside)
    }

    fn token(self) -> &'static str {
        match self {
            Direction::PosX => "+x",
            Direction::NegX => "-x",
            Direction::PosY => "+y",
            Direction::NegY => "-y",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+x" => Ok(Direction::PosX),
            "-x" => Ok(Direction::NegX),
            "+y" => Ok(Direction::PosY),
            "-y" => Ok(Direction::NegY),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PortRole {
    Input,
    Output,
}

/// A write or an expectation at an offset from a port cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Stamp {
    pub dx: i32,
    pub dy: i32,
    pub state: State,
}

impl Stamp {
    pub const fn new(dx: i32, dy: i32, state: State) -> Self {
        Self { dx, dy, state }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub role: PortRole,
    pub position: Cell,
    /// Direction of signal travel through the port.
    pub direction: Direction,
    pub inject_stamp: Vec<Stamp>,
    pub detect_stamp: Vec<Stamp>,
    /// Expected arrival step, counted from the injection step.
    pub latency: Option<u64>,
}

impl Port {
    /// An input port that starts a signal `1,4,4` at `position`, the 4s ahead.
    pub fn input(name: impl Into<String>, position: Cell, direction: Direction) -> Self {
        let inject_stamp = signal_cells(direction, &[1, 4, 4]);
        Self { name: name.into(), role: PortRole::Input, position, direction, inject_stamp, detect_stamp: vec![], latency: None }
    }

    /// An output port expecting the settled signal `1,4,4` followed by two
    /// untouched track cells, the `1` on `position`.
    pub fn output(name: impl Into<String>, position: Cell, direction: Direction, latency: u64) -> Self {
        let detect_stamp = signal_cells(direction, &[1, 4, 4, 2, 2]);
        Self {
            name: name.into(),
            role: PortRole::Output,
            position,
            direction,
            inject_stamp: vec![],
            detect_stamp,
            latency: Some(latency),
        }
    }

    pub fn is_input(&self) -> bool {
        self.role == PortRole::Input
    }

    pub fn stamp_cells<'a>(&'a self, stamps: &'a [Stamp]) -> impl Iterator<Item = (Cell, State)> + 'a {
        stamps.iter().map(|s| (self.position.offset(s.dx, s.dy), s.state))
    }

    /// Whether every detect expectation holds in `config`.
    pub fn detects(&self, config: &Configuration) -> bool {
        !self.detect_stamp.is_empty() && self.stamp_cells(&self.detect_stamp).all(|(c, s)| config.get(c) == s)
    }

    fn transformed(&self, cell: impl Fn(Cell) -> Cell, dir: impl Fn(Direction) -> Direction) -> Port {
        let stamp = |s: &Stamp| {
            let c = cell(Cell::new(s.dx, s.dy));
            let o = cell(Cell::new(0, 0));
            Stamp::new(c.x - o.x, c.y - o.y, s.state)
        };
        Port {
            name: self.name.clone(),
            role: self.role,
            position: cell(self.position),
            direction: dir(self.direction),
            inject_stamp: self.inject_stamp.iter().map(stamp).collect(),
            detect_stamp: self.detect_stamp.iter().map(stamp).collect(),
            latency: self.latency,
        }
    }
}

fn signal_cells(direction: Direction, states: &[State]) -> Vec<Stamp> {
    let (dx, dy) = direction.delta();
    states.iter().enumerate().map(|(i, &s)| Stamp::new(dx * i as i32, dy * i as i32, s)).collect()
}

/// A stored configuration fragment with named ports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub name: String,
    pub beta: i64,
    pub quiescent: State,
    /// The lower left corner of the frame.
    pub origin: Cell,
    pub width: u32,
    pub height: u32,
    pub grid: Configuration,
    pub ports: Vec<Port>,
    pub notes: Vec<String>,
}

impl Pattern {
    /// A pattern framed by the bounding box of `grid` and its port stamps.
    pub fn framed(name: impl Into<String>, beta: i64, grid: Configuration, ports: Vec<Port>) -> Result<Self, WidgetError> {
        let mut cells: Vec<Cell> = grid.cells().map(|(c, _)| c).collect();
        for p in &ports {
            cells.push(p.position);
            cells.extend(p.stamp_cells(&p.inject_stamp).map(|(c, _)| c));
            cells.extend(p.stamp_cells(&p.detect_stamp).map(|(c, _)| c));
        }
        let bbox = BBox::around(cells.iter().copied()).unwrap_or(BBox { min_x: 0, min_y: 0, max_x: 0, max_y: 0 });
        let pattern = Pattern {
            name: name.into(),
            beta,
            quiescent: grid.quiescent(),
            origin: Cell::new(bbox.min_x, bbox.min_y),
            width: bbox.width(),
            height: bbox.height(),
            grid,
            ports,
            notes: vec![],
        };
        pattern.check()?;
        Ok(pattern)
    }

    pub fn frame(&self) -> BBox {
        BBox {
            min_x: self.origin.x,
            min_y: self.origin.y,
            max_x: self.origin.x + self.width as i32 - 1,
            max_y: self.origin.y + self.height as i32 - 1,
        }
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.is_input())
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| !p.is_input())
    }

    /// Ports and stamps inside the frame, grid inside the frame, unique names.
    pub fn check(&self) -> Result<(), WidgetError> {
        let frame = self.frame();
        if let Some((c, _)) = self.grid.cells().find(|&(c, _)| !frame.contains(c)) {
            return Err(WidgetError::GridOutOfFrame { cell: c });
        }
        let mut names = BTreeSet::new();
        for p in &self.ports {
            if !names.insert(p.name.as_str()) {
                return Err(WidgetError::DuplicatePort(p.name.clone()));
            }
            let stamps = p.stamp_cells(&p.inject_stamp).chain(p.stamp_cells(&p.detect_stamp));
            if !frame.contains(p.position) || stamps.map(|(c, _)| c).any(|c| !frame.contains(c)) {
                return Err(WidgetError::PortOutOfFrame { port: p.name.clone() });
            }
        }
        Ok(())
    }

    /// Moves the pattern and its ports by `(dx, dy)`.
    pub fn translated(&self, dx: i32, dy: i32) -> Pattern {
        let mut p = self.map_cells(|c| c.offset(dx, dy), |d| d);
        p.origin = self.origin.offset(dx, dy);
        p
    }

    /// The reflection `x -> -x`. Under the mirrored rule it behaves like `self`.
    pub fn mirrored(&self) -> Pattern {
        let mut p = self.map_cells(|c| Cell::new(-c.x, c.y), Direction::mirrored);
        p.origin = Cell::new(-(self.origin.x + self.width as i32 - 1), self.origin.y);
        p.beta = -self.beta;
        p
    }

    /// A quarter turn counterclockwise about the origin.
    pub fn rotated(&self) -> Pattern {
        let mut p = self.map_cells(|c| Cell::new(-c.y, c.x), Direction::left);
        p.origin = Cell::new(-(self.origin.y + self.height as i32 - 1), self.origin.x);
        p.width = self.height;
        p.height = self.width;
        p
    }

    fn map_cells(&self, cell: impl Fn(Cell) -> Cell + Copy, dir: impl Fn(Direction) -> Direction + Copy) -> Pattern {
        Pattern {
            name: self.name.clone(),
            beta: self.beta,
            quiescent: self.quiescent,
            origin: self.origin,
            width: self.width,
            height: self.height,
            grid: Configuration::from_cells(self.quiescent, self.grid.cells().map(|(c, s)| (cell(c), s))),
            ports: self.ports.iter().map(|p| p.transformed(cell, dir)).collect(),
            notes: self.notes.clone(),
        }
    }
}

const MAGIC: &str = "#rnca-pattern v1";

/// Parses the line-oriented pattern format.
pub fn load_pattern(text: &str) -> Result<Pattern, WidgetError> {
    let err = |line: usize, reason: String| WidgetError::Parse { line, reason };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((n, other)) => return Err(err(n, format!("expected {MAGIC:?}, found {other:?}"))),
        None => return Err(err(1, "empty input".into())),
    }
    let mut name = String::new();
    let mut beta = None;
    let mut quiescent = None;
    let mut origin = None;
    let mut ports: Vec<Port> = vec![];
    let mut notes = vec![];
    let mut rows: Vec<(usize, &str)> = vec![];
    for (n, line) in lines {
        if let Some(header) = line.strip_prefix('#') {
            if !rows.is_empty() {
                return Err(err(n, "header line after the grid body".into()));
            }
            let (key, value) = header.split_once(':').ok_or_else(|| err(n, format!("malformed header {line:?}")))?;
            let value = value.trim();
            let fields: Vec<&str> = value.split_whitespace().collect();
            let int = |s: &str| s.parse::<i64>().map_err(|_| err(n, format!("bad integer {s:?}")));
            match key.trim() {
                "name" => name = value.to_string(),
                "note" => notes.push(value.to_string()),
                "rule" => {
                    let b = value.strip_prefix("beta=").ok_or_else(|| err(n, format!("expected beta=<b>, found {value:?}")))?;
                    let b = int(b)?;
                    if !(-1..=1).contains(&b) {
                        return Err(err(n, format!("beta must be -1, 0 or 1, got {b}")));
                    }
                    beta = Some(b);
                }
                "quiescent" => {
                    let q = int(value)?;
                    if !(0..=4).contains(&q) {
                        return Err(err(n, format!("quiescent state must be in 0..=4, got {q}")));
                    }
                    quiescent = Some(q);
                }
                "origin" => match fields.as_slice() {
                    [x, y] => origin = Some(Cell::new(int(x)? as i32, int(y)? as i32)),
                    _ => return Err(err(n, "origin needs two coordinates".into())),
                },
                "port" => match fields.as_slice() {
                    [role, pname, x, y, dir] => {
                        let role = match *role {
                            "in" => PortRole::Input,
                            "out" => PortRole::Output,
                            other => return Err(err(n, format!("port role must be in or out, got {other:?}"))),
                        };
                        let direction = dir.parse().map_err(|e| err(n, e))?;
                        ports.push(Port {
                            name: pname.to_string(),
                            role,
                            position: Cell::new(int(x)? as i32, int(y)? as i32),
                            direction,
                            inject_stamp: vec![],
                            detect_stamp: vec![],
                            latency: None,
                        });
                    }
                    _ => return Err(err(n, "port needs <in|out> <NAME> <x> <y> <dir>".into())),
                },
                "stamp" => match fields.as_slice() {
                    [pname, kind, dx, dy, s] => {
                        let stamp = Stamp::new(int(dx)? as i32, int(dy)? as i32, int(s)?);
                        let port = ports
                            .iter_mut()
                            .find(|p| p.name == *pname)
                            .ok_or_else(|| err(n, format!("stamp for undeclared port {pname:?}")))?;
                        match *kind {
                            "inject" => port.inject_stamp.push(stamp),
                            "detect" => port.detect_stamp.push(stamp),
                            other => return Err(err(n, format!("stamp kind must be inject or detect, got {other:?}"))),
                        }
                    }
                    _ => return Err(err(n, "stamp needs <NAME> <inject|detect> <dx> <dy> <state>".into())),
                },
                "latency" => match fields.as_slice() {
                    [pname, steps] => {
                        let steps = steps.parse().map_err(|_| err(n, format!("bad step count {steps:?}")))?;
                        let port = ports
                            .iter_mut()
                            .find(|p| p.name == *pname)
                            .ok_or_else(|| err(n, format!("latency for undeclared port {pname:?}")))?;
                        port.latency = Some(steps);
                    }
                    _ => return Err(err(n, "latency needs <NAME> <steps>".into())),
                },
                other => return Err(err(n, format!("unknown header {other:?}"))),
            }
        } else if !line.is_empty() {
            rows.push((n, line));
        }
    }
    let beta = beta.ok_or_else(|| err(1, "missing #rule header".into()))?;
    let quiescent = quiescent.ok_or_else(|| err(1, "missing #quiescent header".into()))?;
    let origin = origin.unwrap_or_default();
    let width = rows.first().map_or(0, |(_, r)| r.len());
    let height = rows.len();
    let mut grid = Configuration::new(quiescent);
    for (i, &(n, row)) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(err(n, format!("row has {} cells, expected {width}", row.len())));
        }
        let y = origin.y + (height - 1 - i) as i32;
        for (k, ch) in row.chars().enumerate() {
            let state = match ch {
                '.' => quiescent,
                '0'..='4' => ch as State - '0' as State,
                other => return Err(err(n, format!("unexpected character {other:?}"))),
            };
            grid.set(Cell::new(origin.x + k as i32, y), state);
        }
    }
    let pattern = Pattern { name, beta, quiescent, origin, width: width as u32, height: height as u32, grid, ports, notes };
    pattern.check()?;
    Ok(pattern)
}

/// Writes the pattern format; `load_pattern(&save_pattern(p)) == p`.
pub fn save_pattern(p: &Pattern) -> String {
    let mut out = format!("{MAGIC}\n");
    if !p.name.is_empty() {
        out += &format!("#name: {}\n", p.name);
    }
    for note in &p.notes {
        out += &format!("#note: {note}\n");
    }
    out += &format!("#rule: beta={}\n#quiescent: {}\n#origin: {} {}\n", p.beta, p.quiescent, p.origin.x, p.origin.y);
    for port in &p.ports {
        let role = if port.is_input() { "in" } else { "out" };
        out += &format!("#port: {role} {} {} {} {}\n", port.name, port.position.x, port.position.y, port.direction);
    }
    for port in &p.ports {
        for (kind, stamps) in [("inject", &port.inject_stamp), ("detect", &port.detect_stamp)] {
            for s in stamps {
                out += &format!("#stamp: {} {kind} {} {} {}\n", port.name, s.dx, s.dy, s.state);
            }
        }
        if let Some(l) = port.latency {
            out += &format!("#latency: {} {l}\n", port.name);
        }
    }
    out += &render_rows(&p.grid, p.frame());
    out
}

/// Rows of `0-4` and `.` covering `frame`, top row first.
pub fn render_rows(grid: &Configuration, frame: BBox) -> String {
    let mut out = String::new();
    for y in (frame.min_y..=frame.max_y).rev() {
        for x in frame.min_x..=frame.max_x {
            let s = grid.get(Cell::new(x, y));
            out.push(if s == grid.quiescent() { '.' } else { char::from(b'0' + s as u8) });
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wire() -> Pattern {
        let mut grid = Configuration::new(0);
        for x in 0..12 {
            grid.set(Cell::new(x, 0), 2);
            grid.set(Cell::new(x, 1), 2);
        }
        let ports = vec![
            Port::input("in", Cell::new(0, 0), Direction::PosX),
            Port::output("out", Cell::new(6, 0), Direction::PosX, 12),
        ];
        Pattern::framed("wire", 1, grid, ports).unwrap()
    }

    #[test]
    fn minimal_pattern_round_trips() {
        let text = "#rnca-pattern v1\n#rule: beta=1\n#quiescent: 0\n#origin: 0 0\n2\n";
        let p = load_pattern(text).unwrap();
        assert_eq!(p.grid.len(), 1);
        assert!(p.ports.is_empty());
        assert_eq!(load_pattern(&save_pattern(&p)).unwrap(), p);
    }

    #[test]
    fn wire_round_trips_with_ports() {
        let p = wire();
        let back = load_pattern(&save_pattern(&p)).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.ports.len(), 2);
    }

    #[test]
    fn port_outside_frame_rejected() {
        let text = "#rnca-pattern v1\n#rule: beta=1\n#quiescent: 0\n#origin: 0 0\n#port: in A 5 0 +x\n22\n";
        assert_eq!(load_pattern(text), Err(WidgetError::PortOutOfFrame { port: "A".into() }));
    }

    #[test]
    fn stamp_outside_frame_rejected() {
        let text = "#rnca-pattern v1\n#rule: beta=1\n#quiescent: 0\n#origin: 0 0\n#port: in A 0 0 +x\n#stamp: A inject 2 0 4\n22\n";
        assert_eq!(load_pattern(text), Err(WidgetError::PortOutOfFrame { port: "A".into() }));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "#rnca-pattern v1\n#rule: beta=1\n#quiescent: 0\n22\n2\n";
        assert!(matches!(load_pattern(text), Err(WidgetError::Parse { line: 5, .. })));
        assert!(matches!(load_pattern("#rnca-rule v1\n"), Err(WidgetError::Parse { line: 1, .. })));
        let text = "#rnca-pattern v1\n#rule: beta=2\n#quiescent: 0\n2\n";
        assert!(matches!(load_pattern(text), Err(WidgetError::Parse { line: 2, .. })));
    }

    #[test]
    fn quiescent_two_keeps_zero_cells() {
        let text = "#rnca-pattern v1\n#rule: beta=1\n#quiescent: 2\n#origin: -1 3\n0.\n.4\n";
        let p = load_pattern(text).unwrap();
        assert_eq!(p.grid.get(Cell::new(-1, 4)), 0);
        assert_eq!(p.grid.get(Cell::new(0, 3)), 4);
        assert_eq!(p.grid.len(), 2);
        assert_eq!(save_pattern(&p), text);
    }

    #[test]
    fn transforms_preserve_shape() {
        let p = wire();
        let m = p.mirrored();
        assert_eq!(m.mirrored(), p);
        assert_eq!(m.port("in").unwrap().direction, Direction::NegX);
        m.check().unwrap();
        let r = p.rotated();
        r.check().unwrap();
        assert_eq!(r.rotated().rotated().rotated(), p);
        assert_eq!(r.port("out").unwrap().position, Cell::new(0, 6));
        let t = p.translated(3, -2);
        t.check().unwrap();
        assert_eq!(t.port("in").unwrap().position, Cell::new(3, -2));
    }
}
