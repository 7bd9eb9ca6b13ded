//! Trajectories of finite configurations, invariant checks and cycle detection.
//!
//! Every finite trajectory of a five-state RNCA is ultimately periodic, so
//! [`detect_cycle`] terminates given enough steps; the limits only guard
//! against pathological inputs and slow rules.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hasher;

use fnv::FnvHasher;
use thiserror::Error;

use crate::config::{step, BBox, Cell, Configuration};
use crate::rule::{Rule, RuleError};

/// Digest of the empty configuration: the FNV-1a 64-bit offset basis.
pub const EMPTY_DIGEST: u64 = 0xcbf2_9ce4_8422_2325;

/// Default step limit for cycle detection.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Default memory budget (approximate bytes) for the digest history.
pub const DEFAULT_MAX_MEMORY: usize = 512 << 20;

/// Which invariants [`run`] asserts after every step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checks {
    /// The relative sum never changes.
    pub conservation: bool,
    /// The support stays inside the one-cell dilation of the previous support.
    pub locality: bool,
    /// The confinement bound of [`assert_confinement`] holds at every step.
    pub confinement: bool,
}

impl Checks {
    pub const ALL: Checks = Checks { conservation: true, locality: true, confinement: true };
    pub const NONE: Checks = Checks { conservation: false, locality: false, confinement: false };
    /// Conservation and locality; confinement only holds for five-state rules.
    pub const GENERIC: Checks = Checks { conservation: true, locality: true, confinement: false };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invariant {
    Conservation,
    Locality,
    Confinement,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::Conservation => "conservation",
            Invariant::Locality => "locality",
            Invariant::Confinement => "confinement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("{which} violated at step {step}: {evidence}")]
    InvariantViolation { step: u64, which: Invariant, evidence: String, prefix: Vec<StatEntry> },
    #[error("no cycle within {steps} steps")]
    LimitExceeded { steps: u64, prefix: Vec<StatEntry> },
    #[error("activity reached the edge of the simulation window at step {step}")]
    WindowExceeded { step: u64 },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StatEntry {
    pub step: u64,
    /// `Σ (q - q0)` over all cells.
    pub relative_sum: i64,
    pub count: usize,
    pub bbox: Option<BBox>,
}

impl StatEntry {
    pub fn of(step: u64, config: &Configuration) -> Self {
        Self { step, relative_sum: config.relative_sum(), count: config.len(), bbox: config.bbox() }
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.bbox.map_or((0, 0), |b| (b.width(), b.height()))
    }
}

impl fmt::Display for StatEntry {
    /// `step sum count WxH`, the line format of [`RunRecord::stats_text`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (w, h) = self.dimensions();
        write!(f, "{} {} {} {w}x{h}", self.step, self.relative_sum, self.count)
    }
}

/// `i < j` with the configuration at step `i` equal to the one at step `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CycleInfo {
    pub i: u64,
    pub j: u64,
}

impl CycleInfo {
    pub fn period(&self) -> u64 {
        self.j - self.i
    }
}

impl fmt::Display for CycleInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cycle i={} j={}", self.i, self.j)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub rule: String,
    pub initial: Configuration,
    pub steps: u64,
    /// One entry per configuration, the initial one included.
    pub stats: Vec<StatEntry>,
    pub cycle: Option<CycleInfo>,
    /// Every configuration of the run, when requested.
    pub frames: Option<Vec<Configuration>>,
}

impl RunRecord {
    /// One line per entry, `step sum count WxH`, after a `#` header.
    pub fn stats_text(&self) -> String {
        let mut out = String::from("# step sum count bbox\n");
        for s in &self.stats {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    pub fn frame(&self, step: u64) -> Option<&Configuration> {
        self.frames.as_ref()?.get(step as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub max_steps: u64,
    pub checks: Checks,
    pub keep_frames: bool,
    /// Stop early and record the cycle once a configuration repeats.
    pub detect_cycle: bool,
}

impl RunOptions {
    pub fn new(max_steps: u64) -> Self {
        Self { max_steps, checks: Checks::GENERIC, keep_frames: false, detect_cycle: false }
    }
}

/// Iterates `step` up to `max_steps` times with the given invariants asserted.
pub fn run(rule: &Rule, config: &Configuration, max_steps: u64, checks: Checks) -> Result<RunRecord, SimError> {
    run_with(rule, config, RunOptions { checks, ..RunOptions::new(max_steps) }, |_, _| {})
}

/// [`run`] with options and an observer called on every configuration,
/// the initial one included.
pub fn run_with(
    rule: &Rule,
    config: &Configuration,
    opts: RunOptions,
    mut observer: impl FnMut(u64, &Configuration),
) -> Result<RunRecord, SimError> {
    if config.quiescent() != rule.quiescent() {
        return Err(RuleError::AlphabetMismatch { expected: rule.quiescent(), found: config.quiescent() }.into());
    }
    config.check_alphabet(rule.states())?;
    let confinement = Confinement::new(rule, config);
    let mut stats = vec![StatEntry::of(0, config)];
    let mut frames = opts.keep_frames.then(|| vec![config.clone()]);
    let mut history: HashMap<u64, Vec<(u64, Configuration)>> = HashMap::new();
    if opts.detect_cycle {
        history.entry(digest(config)).or_default().push((0, config.clone()));
    }
    observer(0, config);
    let mut current = config.clone();
    let mut cycle = None;
    let mut t = 0;
    while t < opts.max_steps {
        let next = step(rule, &current)?;
        t += 1;
        let entry = StatEntry::of(t, &next);
        let fail = |which, evidence: String, stats: &[StatEntry]| SimError::InvariantViolation {
            step: t,
            which,
            evidence,
            prefix: stats.to_vec(),
        };
        if opts.checks.conservation && entry.relative_sum != stats[0].relative_sum {
            return Err(fail(
                Invariant::Conservation,
                format!("relative sum {} became {}", stats[0].relative_sum, entry.relative_sum),
                &stats,
            ));
        }
        if opts.checks.locality {
            if let Some(cell) = next.cells().map(|(c, _)| c).find(|&c| !in_dilation(&current, c)) {
                return Err(fail(Invariant::Locality, format!("cell {cell} left the dilated support"), &stats));
            }
        }
        if opts.checks.confinement {
            if let Some(evidence) = confinement.violation(&entry) {
                return Err(fail(Invariant::Confinement, evidence, &stats));
            }
        }
        observer(t, &next);
        stats.push(entry);
        if let Some(f) = frames.as_mut() {
            f.push(next.clone());
        }
        if opts.detect_cycle {
            let slot = history.entry(digest(&next)).or_default();
            if let Some((i, _)) = slot.iter().find(|(_, c)| *c == next) {
                cycle = Some(CycleInfo { i: *i, j: t });
                break;
            }
            slot.push((t, next.clone()));
        }
        current = next;
    }
    Ok(RunRecord { rule: rule.name().to_string(), initial: config.clone(), steps: t, stats, cycle, frames })
}

fn in_dilation(prev: &Configuration, c: crate::config::Cell) -> bool {
    let q0 = prev.quiescent();
    [(0, 0), (0, 1), (1, 0), (0, -1), (-1, 0)].iter().any(|&(dx, dy)| prev.get(c.offset(dx, dy)) != q0)
}

/// The bound a finite trajectory stays inside: the initial box when the
/// quiescent state is strictly between the extreme states, otherwise the
/// count of non-quiescent cells is at most `|N0|`.
struct Confinement {
    interior: bool,
    initial_box: Option<BBox>,
    magnitude: i64,
}

impl Confinement {
    fn new(rule: &Rule, config: &Configuration) -> Self {
        let q = rule.states();
        let q0 = rule.quiescent();
        Self {
            interior: q0 != q.min() && q0 != q.max(),
            initial_box: config.bbox(),
            magnitude: config.relative_sum().abs(),
        }
    }

    fn violation(&self, entry: &StatEntry) -> Option<String> {
        if self.interior {
            match (entry.bbox, self.initial_box) {
                (None, _) => None,
                (Some(b), Some(init)) if init.contains_box(&b) => None,
                (Some(b), init) => Some(format!("box {b:?} escapes initial box {init:?}")),
            }
        } else if entry.count as i64 > self.magnitude {
            Some(format!("{} non-quiescent cells exceed |N0| = {}", entry.count, self.magnitude))
        } else {
            None
        }
    }
}

/// Checks the confinement bound over a whole record.
pub fn assert_confinement(record: &RunRecord, rule: &Rule) -> bool {
    let bound = Confinement::new(rule, &record.initial);
    record.stats.iter().all(|e| bound.violation(e).is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleLimits {
    pub max_steps: u64,
    /// Approximate bytes the digest history may hold before switching to
    /// the constant-memory search.
    pub max_memory: usize,
}

impl Default for CycleLimits {
    fn default() -> Self {
        Self { max_steps: DEFAULT_MAX_STEPS, max_memory: DEFAULT_MAX_MEMORY }
    }
}

fn footprint(c: &Configuration) -> usize {
    64 + 48 * c.len()
}

/// Finds the first configuration that recurs (`i`) and its first recurrence
/// (`j`). Conservation is asserted on every step.
pub fn detect_cycle(rule: &Rule, config: &Configuration, limits: CycleLimits) -> Result<CycleInfo, SimError> {
    if config.quiescent() != rule.quiescent() {
        return Err(RuleError::AlphabetMismatch { expected: rule.quiescent(), found: config.quiescent() }.into());
    }
    let sum = config.relative_sum();
    let mut prefix = vec![StatEntry::of(0, config)];
    let mut history: HashMap<u64, Vec<(u64, Configuration)>> = HashMap::new();
    let mut memory = footprint(config);
    history.entry(digest(config)).or_default().push((0, config.clone()));
    let mut current = config.clone();
    for t in 1..=limits.max_steps {
        let next = step(rule, &current)?;
        let entry = StatEntry::of(t, &next);
        if entry.relative_sum != sum {
            return Err(SimError::InvariantViolation {
                step: t,
                which: Invariant::Conservation,
                evidence: format!("relative sum {sum} became {}", entry.relative_sum),
                prefix,
            });
        }
        if prefix.len() < 1024 {
            prefix.push(entry);
        }
        let slot = history.entry(digest(&next)).or_default();
        if let Some((i, _)) = slot.iter().find(|(_, c)| *c == next) {
            return Ok(CycleInfo { i: *i, j: t });
        }
        memory += footprint(&next);
        if memory > limits.max_memory {
            return brent(rule, config, limits.max_steps, prefix);
        }
        slot.push((t, next.clone()));
        current = next;
    }
    Err(SimError::LimitExceeded { steps: limits.max_steps, prefix })
}

/// Brent's cycle search; constant memory, exact `(i, j)`.
fn brent(rule: &Rule, x0: &Configuration, max_steps: u64, prefix: Vec<StatEntry>) -> Result<CycleInfo, SimError> {
    let exceeded = |prefix: Vec<StatEntry>| SimError::LimitExceeded { steps: max_steps, prefix };
    let mut budget = 0u64;
    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = x0.clone();
    let mut hare = step(rule, x0)?;
    while tortoise != hare {
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = step(rule, &hare)?;
        lam += 1;
        budget += 1;
        if budget > max_steps {
            return Err(exceeded(prefix));
        }
    }
    let mut tortoise = x0.clone();
    let mut hare = x0.clone();
    for _ in 0..lam {
        hare = step(rule, &hare)?;
    }
    let mut mu = 0;
    while tortoise != hare {
        tortoise = step(rule, &tortoise)?;
        hare = step(rule, &hare)?;
        mu += 1;
        if mu > max_steps {
            return Err(exceeded(prefix));
        }
    }
    Ok(CycleInfo { i: mu, j: mu + lam })
}

/// FNV-1a over the quiescent state and the sorted non-quiescent cells.
/// Storage order never matters because cells are kept sorted.
pub fn digest(config: &Configuration) -> u64 {
    if config.is_empty() {
        return EMPTY_DIGEST;
    }
    let mut h = FnvHasher::default();
    h.write_i64(config.quiescent());
    for (c, s) in config.cells() {
        h.write_i32(c.x);
        h.write_i32(c.y);
        h.write_i64(s);
    }
    h.finish()
}

/// A fixed rectangle stepped in place. After the first step only cells next
/// to the previous step's changes are recomputed, which makes long runs of
/// large, mostly static patterns cheap. Conservation is checked every step.
#[derive(Clone, Debug)]
pub struct Window<'r> {
    rule: &'r Rule,
    frame: BBox,
    width: usize,
    cells: Vec<u8>,
    values: Vec<i64>,
    changed: Vec<usize>,
    seen: Vec<u64>,
    full: bool,
    steps: u64,
}

impl<'r> Window<'r> {
    /// `config` framed by its bounding box grown by `margin` cells.
    pub fn new(rule: &'r Rule, config: &Configuration, margin: u32) -> Result<Self, SimError> {
        if config.quiescent() != rule.quiescent() {
            return Err(RuleError::AlphabetMismatch { expected: rule.quiescent(), found: config.quiescent() }.into());
        }
        config.check_alphabet(rule.states())?;
        let states = rule.states();
        let q0 = states.index_of(rule.quiescent()).expect("quiescent in alphabet") as u8;
        let frame = config.bbox().unwrap_or(BBox { min_x: 0, min_y: 0, max_x: 0, max_y: 0 }).grow(margin.max(1) as i32);
        let width = frame.width() as usize;
        let mut cells = vec![q0; width * frame.height() as usize];
        for (c, s) in config.cells() {
            cells[(c.y - frame.min_y) as usize * width + (c.x - frame.min_x) as usize] = states.index_of(s).expect("checked") as u8;
        }
        let values = states.iter().map(|s| s - rule.quiescent()).collect();
        let seen = vec![0; cells.len()];
        Ok(Window { rule, frame, width, cells, values, changed: vec![], seen, full: true, steps: 0 })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn frame(&self) -> BBox {
        self.frame
    }

    /// The state at `c`; quiescent outside the frame.
    pub fn get(&self, c: Cell) -> crate::state::State {
        let states = self.rule.states();
        if !self.frame.contains(c) {
            return self.rule.quiescent();
        }
        states.state_at(self.cells[(c.y - self.frame.min_y) as usize * self.width + (c.x - self.frame.min_x) as usize] as usize)
    }

    pub fn matches(&self, cells: impl IntoIterator<Item = (Cell, crate::state::State)>) -> bool {
        cells.into_iter().all(|(c, s)| self.get(c) == s)
    }

    pub fn step(&mut self) -> Result<(), SimError> {
        let w = self.width;
        let h = self.cells.len() / w;
        let candidates: Vec<usize> = if self.full {
            (0..self.cells.len()).collect()
        } else {
            let mark = self.steps + 1;
            let mut out = Vec::with_capacity(self.changed.len() * 5);
            for &i in &self.changed {
                for j in [i, i + w, i + 1, i - w, i - 1] {
                    if self.seen[j] != mark {
                        self.seen[j] = mark;
                        out.push(j);
                    }
                }
            }
            out
        };
        let mut updates = Vec::new();
        let mut delta = 0;
        for i in candidates {
            let (x, y) = (i % w, i / w);
            let cur = self.cells[i];
            let next = if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                cur
            } else {
                let c = &self.cells;
                self.rule.lookup_indices(cur as usize, c[i + w] as usize, c[i + 1] as usize, c[i - w] as usize, c[i - 1] as usize)
                    as u8
            };
            if next != cur {
                if x <= 1 || y <= 1 || x >= w - 2 || y >= h - 2 {
                    return Err(SimError::WindowExceeded { step: self.steps + 1 });
                }
                delta += self.values[next as usize] - self.values[cur as usize];
                updates.push((i, next));
            }
        }
        self.steps += 1;
        if delta != 0 {
            return Err(SimError::InvariantViolation {
                step: self.steps,
                which: Invariant::Conservation,
                evidence: format!("relative sum changed by {delta}"),
                prefix: vec![],
            });
        }
        self.changed.clear();
        for (i, v) in updates {
            self.cells[i] = v;
            self.changed.push(i);
        }
        self.full = false;
        Ok(())
    }

    /// The current contents as a sparse configuration.
    pub fn configuration(&self) -> Configuration {
        let states = self.rule.states();
        let q0 = self.rule.quiescent();
        let mut out = Configuration::new(q0);
        for (i, &v) in self.cells.iter().enumerate() {
            let s = states.state_at(v as usize);
            if s != q0 {
                out.set(Cell::new((i % self.width) as i32 + self.frame.min_x, (i / self.width) as i32 + self.frame.min_y), s);
            }
        }
        out
    }
}
