//! Geometric placement of a plan. Rows sit at fixed pitch; operations are
//! laid out in column blocks from left to right. All times are absolute
//! steps after the single injection at step 0.
//!
//! A row is followed by a tracer: the track cell where the front `1` of
//! the signal sits at time `t`. On a straight track the front advances two
//! cells every four steps, so only every other cell (the row's phase) sees
//! it; corners must be placed on such cells.

use std::collections::{BTreeMap, HashMap};

use super::plan::{Class, GateKind, Op, Plan, RowId, RowOrigin};
use super::{CompileError, CompileOptions, GateRecord};
use crate::config::{BBox, Cell, Configuration};
use crate::state::State;
use crate::widgets::{ccw_corner, cw_corner, Catalog, Direction, Pattern, Port, Widget, CCW_CORNER_LATENCY, CW_CORNER_LATENCY};

#[derive(Default)]
struct Canvas {
    cells: HashMap<Cell, State>,
}

impl Canvas {
    fn put(&mut self, c: Cell, s: State) -> Result<(), CompileError> {
        match self.cells.insert(c, s) {
            Some(old) if old != s => Err(CompileError::Internal(format!("cell {c} written as {old} and {s}"))),
            _ => Ok(()),
        }
    }

    fn column_free(&self, x: i32, y_lo: i32, y_hi: i32) -> bool {
        (y_lo..=y_hi).all(|y| !self.cells.contains_key(&Cell::new(x, y)))
    }
}

#[derive(Clone, Debug)]
struct Tracer {
    pos: Cell,
    dir: Direction,
    t: i64,
    /// Track already exists up to this column (eastward rows only); corners
    /// must come after it.
    clear_x: i32,
}

impl Tracer {
    fn lay(&self, canvas: &mut Canvas, c: Cell) -> Result<(), CompileError> {
        canvas.put(c, 2)?;
        canvas.put(self.dir.offset(c, 0, 1), 2)
    }

    /// Advances the front `2k` cells.
    fn run(&mut self, canvas: &mut Canvas, k: i32) -> Result<(), CompileError> {
        for j in 1..=2 * k {
            self.lay(canvas, self.dir.offset(self.pos, j, 0))?;
        }
        self.pos = self.dir.offset(self.pos, 2 * k, 0);
        self.t += 4 * k as i64;
        Ok(())
    }

    /// Runs east to the first phase cell at or after `x`.
    fn run_to(&mut self, canvas: &mut Canvas, x: i32) -> Result<(), CompileError> {
        debug_assert_eq!(self.dir, Direction::PosX);
        let k = (x - self.pos.x + 1).max(0) / 2;
        self.run(canvas, k)
    }

    fn phase_at_or_after(&self, x: i32) -> i32 {
        let x = x.max(self.pos.x);
        x + (x - self.pos.x).rem_euclid(2)
    }

    fn ready(&mut self, canvas: &mut Canvas) -> Result<(), CompileError> {
        if self.dir == Direction::PosX && self.pos.x < self.clear_x {
            let x = self.phase_at_or_after(self.clear_x + 2);
            self.run_to(canvas, x)?;
        }
        Ok(())
    }

    fn turn(&mut self, canvas: &mut Canvas, clockwise: bool) -> Result<(), CompileError> {
        self.ready(canvas)?;
        let (extra, start, dir) = if clockwise { cw_corner(self.pos, self.dir) } else { ccw_corner(self.pos, self.dir) };
        for (c, s) in extra {
            canvas.put(c, s)?;
        }
        self.pos = start;
        self.dir = dir;
        self.t += if clockwise { CW_CORNER_LATENCY } else { CCW_CORNER_LATENCY } as i64;
        self.lay(canvas, start)
    }

    /// A straight run of `n` cells (odd) after a corner.
    fn leg(&mut self, canvas: &mut Canvas, n: i32) -> Result<(), CompileError> {
        debug_assert!(n % 2 == 1);
        self.run(canvas, (n - 1) / 2)
    }

    /// Drops an eastward row by `n + 2` cells.
    fn step_down(&mut self, canvas: &mut Canvas, n: i32) -> Result<(), CompileError> {
        self.turn(canvas, true)?;
        self.leg(canvas, n)?;
        self.turn(canvas, false)
    }

    /// A detour below an eastward row of depth `v` (odd, at least 3) that
    /// returns to the same row.
    fn bump(&mut self, canvas: &mut Canvas, v: i32) -> Result<(), CompileError> {
        let y = self.pos.y;
        self.run(canvas, 2)?;
        self.turn(canvas, true)?;
        self.leg(canvas, v)?;
        self.turn(canvas, false)?;
        self.turn(canvas, false)?;
        self.leg(canvas, v - 2)?;
        self.turn(canvas, true)?;
        debug_assert_eq!((self.pos.y, self.dir), (y, Direction::PosX));
        Ok(())
    }
}

/// Extra steps a bump of depth `v` costs over straight track, and the
/// columns it spans.
fn bump_cost(v: i32) -> (i64, i32) {
    let mut tr = Tracer { pos: Cell::new(0, 0), dir: Direction::PosX, t: 0, clear_x: 0 };
    tr.bump(&mut Canvas::default(), v).expect("bump on an empty canvas");
    (tr.t - 2 * tr.pos.x as i64, tr.pos.x)
}

/// An input or constant source not yet laid: the signal is stamped at
/// `(x0, y0)`; a source above its row steps down onto it.
#[derive(Clone, Debug)]
struct Source {
    x0: i32,
    y0: i32,
    y: i32,
}

impl Source {
    /// Lays the source with `green` speed-1 cells right after the stamp.
    fn lay(&self, canvas: &mut Canvas, green: i32) -> Result<Tracer, CompileError> {
        let head = self.x0 + green + 10;
        let mut tr = Tracer { pos: Cell::new(self.x0, self.y0), dir: Direction::PosX, t: 0, clear_x: self.x0 };
        for x in self.x0..=head {
            let s = if x >= self.x0 + 3 && x < self.x0 + 3 + green { 3 } else { 2 };
            canvas.put(Cell::new(x, self.y0), s)?;
            canvas.put(Cell::new(x, self.y0 + 1), 2)?;
        }
        tr.pos = Cell::new(head, self.y0);
        tr.t = green as i64 + 20;
        if self.y0 != self.y {
            tr.step_down(canvas, self.y0 - self.y - 2)?;
        }
        Ok(tr)
    }
}

#[derive(Clone, Debug)]
enum Row {
    Pending(Source),
    Active(Tracer),
}

impl Row {
    fn activate(&mut self, canvas: &mut Canvas, green: i32) -> Result<&mut Tracer, CompileError> {
        if let Row::Pending(s) = self {
            *self = Row::Active(s.lay(canvas, green)?);
        }
        match self {
            Row::Active(t) => Ok(t),
            Row::Pending(_) => unreachable!(),
        }
    }

    /// The tracer this row would have without speed-1 cells, on a
    /// throwaway canvas.
    fn probe(&self) -> Result<Tracer, CompileError> {
        match self {
            Row::Pending(s) => s.lay(&mut Canvas::default(), 0),
            Row::Active(t) => Ok(t.clone()),
        }
    }
}

pub struct Layout {
    pub pattern: Pattern,
    pub constants: Vec<String>,
    pub outputs: Vec<(String, u64)>,
    pub gates: Vec<GateRecord>,
}

struct Geometry {
    gate_a: Cell,
    gate_b: Cell,
    gate_o: Cell,
    gate_extent: BBox,
    branch_i: Cell,
    branch_r: Cell,
    branch_d: Cell,
    branch_extent: BBox,
}

fn port(w: &Widget, name: &str) -> Result<Port, CompileError> {
    w.pattern.port(name).cloned().ok_or_else(|| CompileError::CatalogIncomplete(format!("{} has no port {name}", w.name())))
}

fn latency(w: &Widget, name: &str) -> Result<i64, CompileError> {
    port(w, name)?.latency.map(|l| l as i64).ok_or_else(|| CompileError::CatalogIncomplete(format!("{}.{name} has no latency", w.name())))
}

pub fn lay_out(plan: &Plan, classes: &[Class], names: &[String], catalog: &Catalog, opts: &CompileOptions) -> Result<Layout, CompileError> {
    let missing = |w: &str| CompileError::CatalogIncomplete(format!("no {w} widget"));
    let branch = catalog.branch.as_ref().ok_or_else(|| missing("branch"))?;
    let and = catalog.and.as_ref().ok_or_else(|| missing("AND"))?;
    let andnot = catalog.andnot.as_ref().ok_or_else(|| missing("ANDNOT"))?;
    let (a, b, o) = (port(and, "A")?, port(and, "B")?, port(and, "O")?);
    for (w, p) in [(andnot, "A"), (andnot, "B"), (andnot, "O")] {
        let q = port(w, p)?;
        let r = port(and, p)?;
        if (q.position, q.direction) != (r.position, r.direction) {
            return Err(CompileError::CatalogIncomplete("AND and ANDNOT ports differ".into()));
        }
    }
    let (bi, br, bd) = (port(branch, "I")?, port(branch, "R")?, port(branch, "D")?);
    let east = Direction::PosX;
    if [a.direction, o.direction, bi.direction, br.direction, bd.direction].iter().any(|&d| d != east)
        || b.direction != Direction::PosY
        || o.position.y != a.position.y
        || br.position.y != bi.position.y
        || bd.position.y >= bi.position.y
        || b.position.y >= a.position.y
    {
        return Err(CompileError::CatalogIncomplete("widget ports are not in the expected arrangement".into()));
    }
    let geo = Geometry {
        gate_a: a.position,
        gate_b: b.position,
        gate_o: o.position,
        gate_extent: and.pattern.frame(),
        branch_i: bi.position,
        branch_r: br.position,
        branch_d: bd.position,
        branch_extent: branch.pattern.frame(),
    };
    let mut lay = Placer {
        canvas: Canvas::default(),
        rows: HashMap::new(),
        y: slot_heights(plan, opts.pitch),
        classes,
        cx: 4,
        geo,
        and,
        andnot,
        branch,
        opts,
        ports: vec![],
        constants: vec![],
        outputs: vec![],
        gates: vec![],
        vmax: (opts.pitch as i32 - 9) | 1,
    };
    if lay.vmax < 3 {
        return Err(CompileError::RoutingInfeasible(format!("pitch {} leaves no room for detours", opts.pitch)));
    }
    for &r in &plan.input_order {
        let RowOrigin::Input(i) = plan.rows[r] else { unreachable!() };
        let src = lay.source_for(r, 0)?;
        lay.ports.push(Port::input(names[i].clone(), Cell::new(src.x0, src.y0), east));
        lay.rows.insert(r, Row::Pending(src));
    }
    for op in &plan.ops {
        lay.op(plan, op)?;
    }
    let grid = Configuration::from_cells(0, lay.canvas.cells.iter().map(|(&c, &s)| (c, s)));
    let mut pattern = Pattern::framed("circuit", 1, grid, lay.ports).map_err(|e| CompileError::Internal(e.to_string()))?;
    pattern.notes.extend(lay.constants.iter().map(|c| format!("constant {c}")));
    Ok(Layout { pattern, constants: lay.constants, outputs: lay.outputs, gates: lay.gates })
}

/// Top-to-bottom order of row levels: a copy goes directly below its
/// original, a constant directly beside the row it meets, and a gate's
/// output stays on its first operand's level.
fn slot_heights(plan: &Plan, pitch: u32) -> HashMap<RowId, i32> {
    let mut order: Vec<usize> = vec![];
    let mut slot: HashMap<RowId, usize> = HashMap::new();
    let mut next = 0;
    let mut fresh = |order: &mut Vec<usize>, at: usize| {
        order.insert(at, next);
        next += 1;
        next - 1
    };
    for &r in &plan.input_order {
        let s = { let n = order.len(); fresh(&mut order, n) };
        slot.insert(r, s);
    }
    let pos = |order: &Vec<usize>, s: usize| order.iter().position(|&x| x == s).expect("slot exists");
    for op in &plan.ops {
        match *op {
            Op::Branch { row, copy } => {
                let at = pos(&order, slot[&row]) + 1;
                let s = fresh(&mut order, at);
                slot.insert(copy, s);
            }
            Op::Gate { a, b, out, .. } => {
                let (ta, tb) = (!slot.contains_key(&a), !slot.contains_key(&b));
                match (ta, tb) {
                    (true, true) => {
                        let s = { let n = order.len(); fresh(&mut order, n) };
                        slot.insert(a, s);
                        let s = { let n = order.len(); fresh(&mut order, n) };
                        slot.insert(b, s);
                    }
                    (true, false) => {
                        let at = pos(&order, slot[&b]);
                        let s = fresh(&mut order, at);
                        slot.insert(a, s);
                    }
                    (false, true) => {
                        let at = pos(&order, slot[&a]) + 1;
                        let s = fresh(&mut order, at);
                        slot.insert(b, s);
                    }
                    (false, false) => {}
                }
                slot.insert(out, slot[&a]);
            }
            Op::Output { row, .. } => {
                slot.entry(row).or_insert_with(|| {
                    let n = order.len();
                    fresh(&mut order, n)
                });
            }
            Op::Drop { .. } => {}
        }
    }
    let height: HashMap<usize, i32> = order.iter().enumerate().map(|(i, &s)| (s, -(i as i32) * pitch as i32)).collect();
    slot.into_iter().map(|(r, s)| (r, height[&s])).collect()
}

struct Placer<'a> {
    canvas: Canvas,
    rows: HashMap<RowId, Row>,
    y: HashMap<RowId, i32>,
    classes: &'a [Class],
    /// First free column for the next block.
    cx: i32,
    geo: Geometry,
    and: &'a Widget,
    andnot: &'a Widget,
    branch: &'a Widget,
    opts: &'a CompileOptions,
    ports: Vec<Port>,
    constants: Vec<String>,
    outputs: Vec<(String, u64)>,
    gates: Vec<GateRecord>,
    vmax: i32,
}

impl Placer<'_> {
    /// A source for row `r` whose first track cell is at or after `x`, with
    /// the phase class the plan assigned.
    fn source_for(&self, r: RowId, x: i32) -> Result<Source, CompileError> {
        let class = self.classes[r];
        let y = self.y[&r];
        let y0 = if class.sigma == (y.rem_euclid(2) == 1) { y } else { y + 3 };
        let x0 = if (x + y0).rem_euclid(2) == class.rho as i32 { x } else { x + 1 };
        Ok(Source { x0, y0, y })
    }

    /// A constant source for row `r`, started as far left as free space
    /// along its level allows.
    fn constant_row(&mut self, r: RowId) -> Result<(), CompileError> {
        let y = self.y[&r];
        let mut x = self.cx;
        while x > 0 && self.canvas.column_free(x - 1, y - 4, y + 9) {
            x -= 1;
        }
        let start = if x == 0 { 0 } else { x + 3 };
        let src = self.source_for(r, start)?;
        let name = format!("TRUE.{}", self.constants.len() + 1);
        self.ports.push(Port::input(name.clone(), Cell::new(src.x0, src.y0), Direction::PosX));
        self.constants.push(name);
        self.rows.insert(r, Row::Pending(src));
        Ok(())
    }

    fn row(&mut self, r: RowId) -> Result<&mut Row, CompileError> {
        self.rows.get_mut(&r).ok_or_else(|| CompileError::Internal(format!("row {r} used before it exists")))
    }

    fn op(&mut self, plan: &Plan, op: &Op) -> Result<(), CompileError> {
        match op {
            Op::Drop { row } => {
                let mut row = self.rows.remove(row).expect("dropped row exists");
                row.activate(&mut self.canvas, 0)?;
            }
            Op::Output { row, name } => {
                if !self.rows.contains_key(row) {
                    self.constant_row(*row)?;
                }
                let mut r = self.rows.remove(row).expect("output row exists");
                let tr = r.activate(&mut self.canvas, 0)?;
                tr.ready(&mut self.canvas)?;
                let port = Port::output(name.clone(), tr.pos, Direction::PosX, tr.t as u64);
                tr.run(&mut self.canvas, 3)?;
                self.outputs.push((name.clone(), port.latency.expect("output latency")));
                self.ports.push(port);
            }
            Op::Branch { row, copy } => self.branch_block(*row, *copy)?,
            Op::Gate { kind, a, b, out, name } => {
                for r in [*a, *b] {
                    if plan.rows[r] == RowOrigin::True && !self.rows.contains_key(&r) {
                        self.constant_row(r)?;
                    }
                }
                self.gate_block(*kind, *a, *b, *out, name)?;
            }
        }
        Ok(())
    }

    fn branch_block(&mut self, row: RowId, copy: RowId) -> Result<(), CompileError> {
        let g = &self.geo;
        let (gi, gr, gd, ext) = (g.branch_i, g.branch_r, g.branch_d, g.branch_extent);
        let cx = self.cx;
        let mut r = self.rows.remove(&row).expect("branched row exists");
        let tr = r.activate(&mut self.canvas, 0)?;
        tr.ready(&mut self.canvas)?;
        let xi = tr.phase_at_or_after(cx + 2 + gi.x - ext.min_x);
        tr.run_to(&mut self.canvas, xi)?;
        let (dx, dy) = (xi - gi.x, tr.pos.y - gi.y);
        for (c, s) in self.branch.pattern.grid.cells() {
            self.canvas.put(c.offset(dx, dy), s)?;
        }
        let t = tr.t;
        let right = ext.max_x + dx;
        let rt = Tracer { pos: gr.offset(dx, dy), dir: Direction::PosX, t: t + latency(self.branch, "R")?, clear_x: right };
        let mut dt = Tracer { pos: gd.offset(dx, dy), dir: Direction::PosX, t: t + latency(self.branch, "D")?, clear_x: right };
        let drop = dt.pos.y - self.y[&copy];
        if drop != 0 {
            if drop < 10 || drop % 2 != 0 {
                return Err(CompileError::RoutingInfeasible(format!("copy row {drop} cells below the branch output")));
            }
            dt.step_down(&mut self.canvas, 1)?;
            dt.step_down(&mut self.canvas, drop - 5)?;
        }
        self.cx = right.max(dt.pos.x) + 4;
        self.rows.insert(row, Row::Active(rt));
        self.rows.insert(copy, Row::Active(dt));
        Ok(())
    }

    fn gate_block(&mut self, kind: GateKind, a: RowId, b: RowId, out: RowId, name: &str) -> Result<(), CompileError> {
        let widget = if kind == GateKind::And { self.and } else { self.andnot };
        let (ga, gb, go, ext) = (self.geo.gate_a, self.geo.gate_b, self.geo.gate_o, self.geo.gate_extent);
        let ya = self.y[&a];
        let yb = self.y[&b];
        let bport_y = ya + gb.y - ga.y;
        let rise = bport_y - (yb + 6);
        if rise < 0 || rise % 2 != 0 {
            return Err(CompileError::RoutingInfeasible(format!("gate {name}: operand rows {} apart", ya - yb)));
        }
        // Mismatch between the two arrivals with straight wiring.
        let (pa, pb) = (self.row(a)?.probe()?, self.row(b)?.probe()?);
        let mut qa = pa.clone();
        let mut qb = pb.clone();
        let mut scratch = Canvas::default();
        qa.ready(&mut scratch)?;
        qb.ready(&mut scratch)?;
        let xg = qa.phase_at_or_after(qb.pos.x.max(qa.pos.x) + 4);
        let p = xg + gb.x - ga.x - 1;
        if (p - qb.pos.x).rem_euclid(2) != 0 {
            return Err(CompileError::DelayUnsatisfiable(format!("gate {name}: operands on incompatible phases")));
        }
        qa.run_to(&mut scratch, xg)?;
        qb.run_to(&mut scratch, p)?;
        let tb = qb.t + CCW_CORNER_LATENCY as i64 + rise as i64 * 2;
        let mismatch = qa.t - tb;
        let pristine = |r: &Row| matches!(r, Row::Pending(_));
        let (free_a, free_b) = (pristine(self.row(a)?), pristine(self.row(b)?));
        let fix = equalize(mismatch, free_a, free_b, self.vmax, self.opts.max_detours)
            .ok_or_else(|| CompileError::DelayUnsatisfiable(format!("gate {name}: arrivals differ by {mismatch} steps")))?;
        let cx = self.cx;
        let mut right = cx;
        for (r, green, bumps) in [(a, fix.green_a, &fix.bumps_a), (b, fix.green_b, &fix.bumps_b)] {
            let mut row = self.rows.remove(&r).expect("operand row exists");
            let tr = row.activate(&mut self.canvas, green)?;
            tr.ready(&mut self.canvas)?;
            if !bumps.is_empty() {
                let x = tr.phase_at_or_after(cx + 2);
                tr.run_to(&mut self.canvas, x)?;
            }
            for &v in bumps {
                tr.bump(&mut self.canvas, v)?;
            }
            right = right.max(tr.pos.x);
            self.rows.insert(r, row);
        }
        let Some(Row::Active(ta)) = self.rows.remove(&a) else { unreachable!() };
        let Some(Row::Active(tb)) = self.rows.remove(&b) else { unreachable!() };
        let (mut ta, mut tb) = (ta, tb);
        let xg = ta.phase_at_or_after((right + 2).max(tb.pos.x - (gb.x - ga.x - 1)).max(ext.min_x - ga.x + cx));
        let p = xg + gb.x - ga.x - 1;
        ta.run_to(&mut self.canvas, xg)?;
        tb.run_to(&mut self.canvas, p)?;
        if (ta.pos.x, tb.pos.x) != (xg, p) {
            return Err(CompileError::Internal(format!("gate {name}: operand phases moved")));
        }
        tb.turn(&mut self.canvas, false)?;
        tb.run(&mut self.canvas, rise / 2)?;
        let (dx, dy) = (xg - ga.x, ya - ga.y);
        if tb.pos != gb.offset(dx, dy) || ta.t != tb.t {
            return Err(CompileError::Internal(format!(
                "gate {name}: A arrives at {} on {}, B at {} on {}",
                ta.t, ta.pos, tb.t, tb.pos
            )));
        }
        for (c, s) in widget.pattern.grid.cells() {
            self.canvas.put(c.offset(dx, dy), s)?;
        }
        self.gates.push(GateRecord {
            name: name.to_string(),
            a_port: ta.pos,
            b_port: tb.pos,
            a_arrival: ta.t as u64,
            b_arrival: tb.t as u64,
        });
        let right = ext.max_x + dx;
        let ot = Tracer { pos: go.offset(dx, dy), dir: Direction::PosX, t: ta.t + latency(widget, "O")?, clear_x: right };
        self.rows.insert(out, Row::Active(ot));
        self.cx = right + 4;
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Equalizer {
    bumps_a: Vec<i32>,
    bumps_b: Vec<i32>,
    green_a: i32,
    green_b: i32,
}

/// Delays for two operands whose arrivals differ by `mismatch` (first
/// minus second): detours on either row, and speed-1 cells on a row that
/// still runs straight from its source. Fewest detours first; a mismatch
/// beyond the search's reach is first cut down with deepest detours.
fn equalize(mismatch: i64, free_a: bool, free_b: bool, vmax: i32, max_detours: usize) -> Option<Equalizer> {
    if mismatch % 2 != 0 {
        return None;
    }
    let deepest = bump_cost(vmax).0;
    let bulk = (mismatch.abs() / deepest - 8).max(0);
    if bulk > 0 && max_detours > 0 {
        let rest = mismatch - mismatch.signum() * bulk * deepest;
        let mut eq = equalize(rest, free_a, free_b, vmax, max_detours)?;
        let side = if mismatch > 0 { &mut eq.bumps_b } else { &mut eq.bumps_a };
        side.splice(0..0, std::iter::repeat_n(vmax, bulk as usize));
        return Some(eq);
    }
    let depths: Vec<i32> = (3..=vmax).step_by(2).collect();
    let costs: Vec<i64> = depths.iter().map(|&v| bump_cost(v).0).collect();
    // reach[k]: sums of k detours, with one depth choice that attains each.
    let mut reach: Vec<BTreeMap<i64, Vec<i32>>> = vec![BTreeMap::from([(0, vec![])])];
    let viable = |e: i64| e == 0 || (e > 0 && free_a) || (e < 0 && free_b);
    for n in 0..=max_detours {
        if reach.len() <= n {
            let mut next: BTreeMap<i64, Vec<i32>> = BTreeMap::new();
            for (&s, vs) in &reach[n - 1] {
                for (&v, &c) in depths.iter().zip(&costs) {
                    next.entry(s + c).or_insert_with(|| {
                        let mut w = vs.clone();
                        w.push(v);
                        w
                    });
                }
            }
            reach.push(next);
        }
        let mut best: Option<(i64, Equalizer)> = None;
        for ka in 0..=n {
            for (&sa, va) in &reach[ka] {
                for (&sb, vb) in &reach[n - ka] {
                    let e = mismatch + sa - sb;
                    if viable(e) && best.as_ref().is_none_or(|(b, _)| e.abs() < *b) {
                        let (green_a, green_b) = if e > 0 { (e as i32, 0) } else { (0, -e as i32) };
                        best = Some((e.abs(), Equalizer { bumps_a: va.clone(), bumps_b: vb.clone(), green_a, green_b }));
                    }
                }
            }
        }
        if let Some((_, eq)) = best {
            return Some(eq);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_costs_grow_by_eight() {
        let (c3, w3) = bump_cost(3);
        let (c5, w5) = bump_cost(5);
        assert_eq!(c5 - c3, 8);
        assert_eq!(w3, w5);
        assert_eq!(c3 % 2, 0);
    }

    #[test]
    fn equalizer_prefers_speed_cells_on_fresh_rows() {
        let eq = equalize(40, true, false, 15, 8).unwrap();
        assert_eq!((eq.green_a, eq.bumps_a.len(), eq.bumps_b.len()), (40, 0, 0));
        let eq = equalize(-40, false, false, 15, 8).unwrap();
        let total: i64 = eq.bumps_a.iter().map(|&v| bump_cost(v).0).sum::<i64>() - eq.bumps_b.iter().map(|&v| bump_cost(v).0).sum::<i64>();
        assert_eq!(total, 40);
        assert!(equalize(3, true, true, 15, 8).is_none());
        assert!(equalize(-2, false, false, 15, 0).is_none());
        let eq = equalize(6000, false, false, 15, 16).unwrap();
        let total: i64 = eq.bumps_b.iter().map(|&v| bump_cost(v).0).sum::<i64>() - eq.bumps_a.iter().map(|&v| bump_cost(v).0).sum::<i64>();
        assert_eq!(total, 6000);
    }
}
