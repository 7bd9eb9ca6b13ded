//! The library checked against reference code written from the formula alone.

mod support;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnca::circuit::{compile, parse_netlist};
use rnca::widgets::{gate_and, gate_andnot, inject, red_wire, Catalog, Pattern};
use rnca::{canonical_rule, step, Cell, Configuration, Neighborhood};
use support::{reference_f, Dense};

#[test]
fn canonical_tables_follow_the_formula() {
    for beta in [-1, 0, 1] {
        let rule = canonical_rule(beta, 0).unwrap();
        for (t, v) in rule.entries() {
            assert_eq!(v, reference_f(beta, t.as_array()), "beta={beta} f{t}");
        }
    }
}

#[test]
fn hand_computed_entries() {
    let b1 = canonical_rule(1, 0).unwrap();
    let b0 = canonical_rule(0, 0).unwrap();
    let f = |rule: &rnca::Rule, t: [i64; 5]| rule.apply_local(Neighborhood::from(t)).unwrap();
    assert_eq!(f(&b1, [0, 4, 4, 4, 4]), 4);
    assert_eq!(f(&b1, [0, 0, 0, 4, 1]), 2);
    assert_eq!(f(&b0, [0, 0, 0, 4, 1]), 1);
    assert_eq!(f(&b1, [4, 0, 0, 0, 0]), 0);
    assert_eq!(f(&b1, [2, 0, 4, 0, 1]), 2);
    for s in 1..=3 {
        let mut rng = ChaCha8Rng::seed_from_u64(s as u64);
        for _ in 0..50 {
            let ring: [i64; 4] = std::array::from_fn(|_| rng.gen_range(0..5));
            assert_eq!(f(&b0, [s, ring[0], ring[1], ring[2], ring[3]]), s);
        }
    }
}

fn to_dense(config: &Configuration, margin: i32) -> Dense {
    let b = config.bbox().unwrap();
    let mut d = Dense::new(b.min_x - margin, b.min_y - margin, (b.width() as i32 + 2 * margin) as usize, (b.height() as i32 + 2 * margin) as usize, config.quiescent());
    for (c, s) in config.cells() {
        d.set(c.x, c.y, s);
    }
    d
}

fn from_dense(d: &Dense) -> Configuration {
    let cells = (0..d.h).flat_map(|j| (0..d.w).map(move |i| (i, j)));
    Configuration::from_cells(d.q0, cells.map(|(i, j)| (Cell::new(d.x0 + i as i32, d.y0 + j as i32), d.cells[j * d.w + i])))
}

#[test]
fn stepping_matches_the_dense_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for beta in [-1, 0, 1] {
        for q0 in [0, 2] {
            let rule = canonical_rule(beta, q0).unwrap();
            for _ in 0..10 {
                let cells: Vec<_> = (0..64).map(|i| (Cell::new(i % 8, i / 8), rng.gen_range(0..5))).collect();
                let mut sparse = Configuration::from_cells(q0, cells);
                if sparse.is_empty() {
                    continue;
                }
                let mut dense = to_dense(&sparse, 40);
                let sum = dense.sum();
                for _ in 0..30 {
                    sparse = step(&rule, &sparse).unwrap();
                    dense = dense.step(beta);
                    assert_eq!(sparse, from_dense(&dense));
                    assert_eq!(dense.sum(), sum);
                }
            }
        }
    }
}

/// First step at which every detect stamp of `port` holds, by dense stepping.
fn reference_arrival(pattern: &Pattern, inputs: &[(&str, bool)], port: &str, horizon: u64) -> Option<u64> {
    let assignment: BTreeMap<String, bool> = inputs.iter().map(|(n, v)| (n.to_string(), *v)).collect();
    let mut d = to_dense(&inject(pattern, &assignment).unwrap(), 12);
    let p = pattern.port(port).unwrap();
    let cells: Vec<(Cell, i64)> = p.stamp_cells(&p.detect_stamp).collect();
    for t in 0..=horizon {
        if cells.iter().all(|&(c, s)| d.get(c.x, c.y) == s) {
            return Some(t);
        }
        d = d.step(1);
    }
    None
}

#[test]
fn wire_arrivals_by_reference_simulation() {
    for len in [8, 16, 24] {
        let w = red_wire(len);
        assert_eq!(reference_arrival(&w.pattern, &[("A", true)], "O", 100), Some(2 * len as u64));
        assert_eq!(reference_arrival(&w.pattern, &[("A", false)], "O", 100), None);
    }
}

#[test]
fn gate_latencies_by_reference_simulation() {
    let and = gate_and().pattern;
    let andnot = gate_andnot().pattern;
    let mut and_seen = vec![];
    let mut andnot_seen = vec![];
    for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
        and_seen.push(reference_arrival(&and, &[("A", a), ("B", b)], "O", 150));
        andnot_seen.push(reference_arrival(&andnot, &[("A", a), ("B", b)], "O", 150));
    }
    assert_eq!(and_seen, [None, None, None, and.port("O").unwrap().latency]);
    assert_eq!(andnot_seen, [None, andnot.port("O").unwrap().latency, None, None]);
}

#[test]
fn compiled_schedule_by_reference_simulation() {
    let rule = canonical_rule(1, 0).unwrap();
    let net = parse_netlist("input A\ninput B\ngate g = AND A B\noutput O = g").unwrap();
    let c = compile(&net, &Catalog::standard(), &rule).unwrap();
    let scheduled = c.outputs[0].1;
    let on = reference_arrival(&c.pattern, &[("A", true), ("B", true)], "O", scheduled + 20);
    assert_eq!(on, Some(scheduled));
    assert_eq!(reference_arrival(&c.pattern, &[("A", true), ("B", false)], "O", scheduled + 20), None);
}
