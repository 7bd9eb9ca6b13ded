//! Running configurations until they repeat.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnca::simulate::{detect_cycle, run, Checks, CycleLimits};
use rnca::{canonical_rule, Cell, Configuration};

fn main() {
    let rule = canonical_rule(1, 0).unwrap();

    let single = Configuration::from_cells(0, [(Cell::new(0, 0), 4)]);
    let record = run(&rule, &single, 3, Checks::ALL).unwrap();
    print!("{}", record.stats_text());
    println!("{}", detect_cycle(&rule, &single, CycleLimits::default()).unwrap());

    // Random 6x6 soups, background 2: they never grow and always cycle.
    let rule = canonical_rule(1, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let cells = (0..36).map(|i| (Cell::new(i % 6, i / 6), rng.gen_range(0..5)));
        let soup = Configuration::from_cells(2, cells);
        let cycle = detect_cycle(&rule, &soup, CycleLimits::default()).unwrap();
        println!("sum {:>3}: {cycle}, period {}", soup.relative_sum(), cycle.period());
    }
}
