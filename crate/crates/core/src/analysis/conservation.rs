use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::AnalysisError;
use crate::config::{Cell, Configuration};
use crate::rule::Rule;
use crate::state::State;

/// Largest number of configurations an exhaustive sweep may visit by default.
pub const DEFAULT_SWEEP_BUDGET: u64 = 50_000_000;

/// At most this many violating configurations are kept; all are counted.
const KEPT_VIOLATIONS: usize = 1000;

const CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    /// Every window content, up to `budget` of them.
    Exhaustive { budget: u64 },
    /// `count` window contents drawn uniformly from a ChaCha8 stream seeded with `seed`.
    Sampled { count: u64, seed: u64 },
}

impl SweepMode {
    pub fn exhaustive() -> Self {
        SweepMode::Exhaustive { budget: DEFAULT_SWEEP_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepViolation {
    pub config: Configuration,
    pub sum_before: i64,
    pub sum_after: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConservationReport {
    pub width: u32,
    pub height: u32,
    pub mode: SweepMode,
    pub checked: u64,
    /// Total number of violating window contents.
    pub violation_count: u64,
    /// The first violations in canonical enumeration (or sampling) order.
    pub violations: Vec<SweepViolation>,
}

impl ConservationReport {
    pub fn is_clean(&self) -> bool {
        self.violation_count == 0
    }
}

/// Embeds each `width x height` window content in a quiescent background,
/// steps once, and compares the total sums.
///
/// Sums are taken relative to the quiescent state, so the check means the
/// same thing for every `q0`.
pub fn check_conservation_window(
    rule: &Rule,
    width: u32,
    height: u32,
    mode: SweepMode,
) -> Result<ConservationReport, AnalysisError> {
    if width == 0 || height == 0 {
        return Err(AnalysisError::EmptyWindow { width, height });
    }
    let sweep = Sweep::new(rule, width as usize, height as usize);
    let cells = width * height;
    let (checked, mut found) = match mode {
        SweepMode::Exhaustive { budget } => {
            let total = (sweep.n as u64).checked_pow(cells).filter(|&t| t <= budget).ok_or(
                AnalysisError::BudgetExceeded {
                    needed: (sweep.n as u64).checked_pow(cells).unwrap_or(u64::MAX),
                    budget,
                },
            )?;
            let chunks = total.div_ceil(CHUNK);
            let found: Vec<(u64, Vec<u8>, i64)> = (0..chunks)
                .into_par_iter()
                .flat_map_iter(|k| sweep.exhaustive_range(k * CHUNK, ((k + 1) * CHUNK).min(total)))
                .collect();
            (total, found)
        }
        SweepMode::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let windows: Vec<Vec<u8>> =
                (0..count).map(|_| (0..cells).map(|_| rng.gen_range(0..sweep.n) as u8).collect()).collect();
            let found = windows
                .into_par_iter()
                .enumerate()
                .filter_map(|(i, w)| {
                    let delta = sweep.delta(&w);
                    (delta != 0).then_some((i as u64, w, delta))
                })
                .collect();
            (count, found)
        }
    };
    found.sort_by_key(|(i, _, _)| *i);
    let violation_count = found.len() as u64;
    let violations = found.into_iter().take(KEPT_VIOLATIONS).map(|(_, w, delta)| sweep.describe(&w, delta)).collect();
    Ok(ConservationReport { width, height, mode, checked, violation_count, violations })
}

struct Sweep<'a> {
    rule: &'a Rule,
    n: usize,
    w: usize,
    h: usize,
    q0: u8,
}

impl<'a> Sweep<'a> {
    fn new(rule: &'a Rule, w: usize, h: usize) -> Self {
        let q0 = rule.states().index_of(rule.quiescent()).expect("quiescent in alphabet") as u8;
        Self { rule, n: rule.states().len(), w, h, q0 }
    }

    /// Violations among window contents with canonical numbers in `lo..hi`.
    /// Window cell `k` holds digit `k` of the number, least significant first.
    fn exhaustive_range(&self, lo: u64, hi: u64) -> Vec<(u64, Vec<u8>, i64)> {
        let cells = self.w * self.h;
        let mut digits = vec![0u8; cells];
        let mut v = lo;
        for d in digits.iter_mut() {
            *d = (v % self.n as u64) as u8;
            v /= self.n as u64;
        }
        let mut out = Vec::new();
        let mut padded = self.padded();
        for index in lo..hi {
            self.fill(&mut padded, &digits);
            let delta = self.padded_delta(&padded);
            if delta != 0 {
                out.push((index, digits.clone(), delta));
            }
            for d in digits.iter_mut() {
                *d += 1;
                if (*d as usize) < self.n {
                    break;
                }
                *d = 0;
            }
        }
        out
    }

    fn padded(&self) -> Vec<u8> {
        vec![self.q0; (self.w + 4) * (self.h + 4)]
    }

    fn fill(&self, padded: &mut [u8], window: &[u8]) {
        let pw = self.w + 4;
        for y in 0..self.h {
            let row = (y + 2) * pw + 2;
            padded[row..row + self.w].copy_from_slice(&window[y * self.w..(y + 1) * self.w]);
        }
    }

    fn delta(&self, window: &[u8]) -> i64 {
        let mut padded = self.padded();
        self.fill(&mut padded, window);
        self.padded_delta(&padded)
    }

    /// Change of the total sum after one step; only the one-cell dilation can change.
    fn padded_delta(&self, p: &[u8]) -> i64 {
        let q = self.rule.states().as_slice();
        let pw = self.w + 4;
        let mut delta = 0;
        for y in 1..self.h + 3 {
            for x in 1..self.w + 3 {
                let i = y * pw + x;
                let c = p[i] as usize;
                let v = self.rule.lookup_indices(c, p[i + pw] as usize, p[i + 1] as usize, p[i - pw] as usize, p[i - 1] as usize);
                delta += q[v] - q[c];
            }
        }
        delta
    }

    fn describe(&self, window: &[u8], delta: i64) -> SweepViolation {
        let states = self.rule.states();
        let q0 = self.rule.quiescent();
        let cells = window.iter().enumerate().map(|(k, &s)| {
            (Cell::new((k % self.w) as i32, (k / self.w) as i32), states.state_at(s as usize))
        });
        let config = Configuration::from_cells(q0, cells);
        let sum_before: State = config.relative_sum();
        SweepViolation { config, sum_before, sum_after: sum_before + delta }
    }
}
