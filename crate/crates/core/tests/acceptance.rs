//! One line per acceptance criterion; exits nonzero if any fails.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnca::analysis::{check_conservation_window, decompose, enumerate_rnca, verify_small_triviality, SweepMode};
use rnca::circuit::{compile, evaluate_all, parse_netlist, CompileError};
use rnca::simulate::{detect_cycle, run, Checks, CycleLimits};
use rnca::widgets::{branch, gate_and, gate_andnot, green_wire, measure_speed, red_wire, validate_widget, Catalog};
use rnca::{build_rule, canonical_rule, mirror_rule, step, Cell, Configuration, FlowSpec, Neighborhood, StateSet};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{detail} in {:.1}s", took.as_secs_f64()))
    } else {
        Err(format!("{detail}, but took {:.1}s against a limit of {}s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

/// The certificate a five-state rule with parameter `beta` must have.
type Certificate = (Vec<(i64, i64, i64)>, Vec<(i64, i64, i64, i64)>);

fn expected_entries(beta: i64) -> Certificate {
    (vec![(0, 4, 1)], if beta == 0 { vec![] } else { vec![(0, 1, 4, -beta), (0, 2, 4, -beta), (0, 3, 4, -beta)] })
}

fn classification() -> Outcome {
    let start = Instant::now();
    let flows = enumerate_rnca(&StateSet::range(5)).map_err(|e| e.to_string())?;
    ensure(flows.len() == 4, || format!("{} rules found, expected 4", flows.len()))?;
    let trivial = flows.iter().filter(|f| f.is_zero()).count();
    ensure(trivial == 1, || format!("{trivial} trivial rules"))?;
    let mut betas = BTreeSet::new();
    for f in flows.iter().filter(|f| !f.is_zero()) {
        let beta = [-1, 0, 1]
            .into_iter()
            .find(|&b| (f.direct_entries(), f.triple_entries()) == expected_entries(b))
            .ok_or_else(|| format!("certificate g={:?} T={:?} matches no beta", f.direct_entries(), f.triple_entries()))?;
        betas.insert(beta);
    }
    ensure(betas.len() == 3, || format!("betas {betas:?}"))?;
    within(Duration::from_secs(60), start, "4 rules: trivial and beta -1, 0, 1 with matching certificates".into())
}

fn small_alphabets() -> Outcome {
    let start = Instant::now();
    let report = verify_small_triviality(6).map_err(|e| e.to_string())?;
    ensure(report.nontrivial.is_empty(), || format!("non-trivial: {:?}", report.nontrivial))?;
    within(Duration::from_secs(300), start, format!("{} normalized alphabets, none non-trivial", report.sets_checked))
}

fn soundness_sweep() -> Outcome {
    let start = Instant::now();
    for beta in [-1, 0, 1] {
        let rule = canonical_rule(beta, 0).unwrap();
        let r = check_conservation_window(&rule, 3, 3, SweepMode::exhaustive()).map_err(|e| e.to_string())?;
        ensure(r.checked == 5u64.pow(9) && r.is_clean(), || format!("beta={beta}: {} checked, {} violations", r.checked, r.violation_count))?;
    }
    let base = canonical_rule(1, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut seen = HashSet::new();
    let mut least = u64::MAX;
    while seen.len() < 24 {
        let nbhd = Neighborhood::from(std::array::from_fn::<i64, 5, _>(|_| rng.gen_range(0..5)));
        let value = rng.gen_range(0..5);
        if nbhd == Neighborhood::uniform(0) || base.apply_local(nbhd).unwrap() == value || !seen.insert((nbhd, value)) {
            continue;
        }
        let bad = base.with_entry(nbhd, value).unwrap();
        ensure(!decompose(&bad).is_ncca(), || format!("f{nbhd} := {value} decomposes"))?;
        let r = check_conservation_window(&bad, 3, 3, SweepMode::exhaustive()).map_err(|e| e.to_string())?;
        ensure(!r.is_clean(), || format!("f{nbhd} := {value}: sweep finds no violation"))?;
        least = least.min(r.violation_count);
    }
    within(
        Duration::from_secs(600),
        start,
        format!("3 rules clean over 5^9 windows; 24 perturbations NotNCCA, each with at least {least} sweep violations"),
    )
}

/// Sparse antisymmetric pair function on {0..4}.
fn sparse_pairs(rng: &mut ChaCha8Rng, density: f64) -> [[i64; 5]; 5] {
    let mut t = [[0; 5]; 5];
    for (x, y) in (0..5).flat_map(|x| (x + 1..5).map(move |y| (x, y))) {
        if rng.gen_bool(density) {
            let v = if rng.gen_bool(0.5) { 1 } else { -1 };
            t[x][y] = v;
            t[y][x] = -v;
        }
    }
    t
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut accepted, mut drawn) = (0, 0);
    // At most 25 copies of one flow, so the identity cannot crowd out the rest.
    let mut copies: HashMap<FlowSpec, usize> = HashMap::new();
    while accepted < 100 {
        drawn += 1;
        ensure(drawn < 10_000_000, || format!("only {accepted} closed flows in {drawn} draws"))?;
        let g = sparse_pairs(&mut rng, 0.15);
        let h = sparse_pairs(&mut rng, 0.15);
        let flow = FlowSpec::from_pair_flows(StateSet::range(5), |x, y| g[x as usize][y as usize], |x, y| h[x as usize][y as usize])
            .map_err(|e| e.to_string())?;
        let q0 = rng.gen_range(0..5);
        let Ok(rule) = build_rule(&flow, q0) else { continue };
        if copies.get(&flow).is_some_and(|&n| n >= 25) {
            continue;
        }
        accepted += 1;
        let back = decompose(&rule);
        ensure(back.flow() == Some(&flow), || format!("g={g:?} h={h:?}: decomposed to {:?}", back.verdict))?;
        *copies.entry(flow).or_default() += 1;
    }
    Ok(format!("100 closed flows ({} distinct, from {drawn} draws) round-trip exactly", copies.len()))
}

fn periodicity() -> Outcome {
    let rule_for = |q0| canonical_rule(1, q0).unwrap();
    let mut longest = 0;
    for q0 in [0, 2] {
        let rule = rule_for(q0);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + q0 as u64);
        for k in 0..100 {
            let cells = (0..36).map(|i| (Cell::new(i % 6, i / 6), rng.gen_range(0..5)));
            let soup = Configuration::from_cells(q0, cells);
            let cycle = detect_cycle(&rule, &soup, CycleLimits { max_steps: 1_000_000, ..CycleLimits::default() })
                .map_err(|e| format!("q0={q0} soup {k}: {e}"))?;
            longest = longest.max(cycle.j);
            let record = run(&rule, &soup, cycle.j, Checks::ALL).map_err(|e| format!("q0={q0} soup {k}: {e}"))?;
            let sum = soup.relative_sum();
            ensure(record.stats.iter().all(|s| s.relative_sum == sum), || format!("q0={q0} soup {k}: sum drifts"))?;
            if q0 == 2 {
                let initial = soup.bbox();
                let inside = record.stats.iter().all(|s| match (initial, s.bbox) {
                    (Some(b), Some(now)) => b.contains_box(&now),
                    (_, None) => true,
                    (None, Some(_)) => false,
                });
                ensure(inside, || format!("q0=2 soup {k}: leaves its initial box"))?;
            }
        }
    }
    Ok(format!("200 soups cycle (latest recurrence at step {longest}), sums exact, q0=2 boxes never grow"))
}

fn single_four() -> Outcome {
    let rule = canonical_rule(1, 0).unwrap();
    let single = Configuration::from_cells(0, [(Cell::new(0, 0), 4)]);
    let next = step(&rule, &single).unwrap();
    let cross = Configuration::from_cells(0, [(0, 1), (1, 0), (0, -1), (-1, 0)].map(|(x, y)| (Cell::new(x, y), 1)));
    ensure(next == cross, || format!("one step gives {:?}", next.cells().collect::<Vec<_>>()))?;
    let cycle = detect_cycle(&rule, &single, CycleLimits::default()).map_err(|e| e.to_string())?;
    ensure((cycle.i, cycle.j) == (1, 2), || format!("{cycle}"))?;
    let record = run(&rule, &single, 10, Checks::ALL).map_err(|e| e.to_string())?;
    ensure(record.stats.iter().all(|s| s.relative_sum == 4), || "sum leaves 4".into())?;
    Ok(format!("four 1s around a 0 after one step, {cycle}, sum 4 throughout"))
}

fn widget_suite() -> Outcome {
    let rule = canonical_rule(1, 0).unwrap();
    let red = measure_speed(&rule, red_wire, &[8, 16, 24]).map_err(|e| e.to_string())?;
    ensure(red == Ratio::new(1, 2), || format!("red wire speed {red}"))?;
    let green = measure_speed(&rule, green_wire, &[8, 16, 24]).map_err(|e| e.to_string())?;
    ensure(green == Ratio::from_integer(1), || format!("green segment speed {green}"))?;
    for w in [red_wire(8), red_wire(16), red_wire(24), green_wire(16), branch(), gate_and(), gate_andnot()] {
        let report = validate_widget(&rule, &w, 200).map_err(|e| e.to_string())?;
        ensure(report.verdict, || format!("{report}"))?;
    }
    let wire = validate_widget(&rule, &red_wire(16), 200).unwrap();
    let blocked = wire.reuse_arrivals.as_ref().is_some_and(|r| r.iter().all(Option::is_none));
    ensure(blocked, || "a second signal crossed a traversed wire".into())?;
    Ok("wires at speed 1/2 (slope 2) and 1, branch, AND, ANDNOT validate; traversed wires block a second signal".into())
}

fn compiler() -> Outcome {
    let start = Instant::now();
    let rule = canonical_rule(1, 0).unwrap();
    let nets = [
        ("NOT", "input A\ngate n = NOT A\noutput O = n"),
        ("OR", "input A\ninput B\ngate o = OR A B\noutput O = o"),
        ("AND", "input A\ninput B\ngate a = AND A B\noutput O = a"),
        ("composite", "input A\ninput B\ninput C\ngate x = AND A B\ngate y = NOT C\ngate o = OR x y\noutput O = o"),
    ];
    let mut rows = 0;
    for (name, text) in nets {
        let net = parse_netlist(text).unwrap();
        let circuit = compile(&net, &Catalog::standard(), &rule).map_err(|e| format!("{name}: {e}"))?;
        for (a, got) in evaluate_all(&rule, &circuit) {
            let got = got.map_err(|e| format!("{name} {a:?}: {e}"))?;
            ensure(got == net.evaluate(&a).unwrap(), || format!("{name} {a:?}: got {got:?}"))?;
            rows += 1;
        }
    }
    let crossing = parse_netlist("input A\ninput B\ngate x = ANDNOT A B\ngate y = ANDNOT B A\noutput P = x\noutput Q = y").unwrap();
    match compile(&crossing, &Catalog::standard(), &rule) {
        Err(CompileError::RoutingInfeasible(_)) => {}
        other => return Err(format!("crossing netlist: {:?}", other.map(|_| "compiled"))),
    }
    within(Duration::from_secs(300), start, format!("{rows} truth-table rows exact at their scheduled steps; crossing is RoutingInfeasible"))
}

fn mirror() -> Outcome {
    let mirrored = mirror_rule(&canonical_rule(1, 0).unwrap());
    let target = canonical_rule(-1, 0).unwrap();
    ensure(mirrored.index_table() == target.index_table() && mirrored.quiescent() == target.quiescent(), || {
        "mirror of beta=1 differs from beta=-1".into()
    })?;
    let mut count = 0;
    for w in Catalog::standard().widgets().into_iter().cloned().chain([red_wire(16), green_wire(16)]) {
        let m = w.mirrored();
        let report = validate_widget(&target, &m, 200).map_err(|e| e.to_string())?;
        ensure(report.verdict, || format!("{report}"))?;
        count += 1;
    }
    Ok(format!("mirror(beta=1) = beta=-1 on all 3125 entries; {count} mirrored widgets validate under beta=-1"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("classification of five-state rules", classification),
        ("small alphabets are trivial", small_alphabets),
        ("window conservation sweep", soundness_sweep),
        ("flow round trip", round_trip),
        ("ultimate periodicity", periodicity),
        ("single 4 dynamics", single_four),
        ("widget behavior", widget_suite),
        ("circuit compiler", compiler),
        ("mirror symmetry", mirror),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria pass");
}
