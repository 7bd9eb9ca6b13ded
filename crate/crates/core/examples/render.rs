//! Writing the AND gate as a PPM image, before and after its inputs fire.

use rnca::canonical_rule;
use rnca::render::{render_ppm, RenderSpec};
use rnca::simulate::{run_with, Checks, RunOptions};
use rnca::widgets::{gate_and, inject, render_rows};

fn main() {
    let rule = canonical_rule(1, 0).unwrap();
    let pattern = gate_and().pattern;
    let frame = pattern.frame();
    let start = inject(&pattern, &[("A".into(), true), ("B".into(), true)].into()).unwrap();
    print!("{}", render_rows(&start, frame));

    let mut later = start.clone();
    run_with(&rule, &start, RunOptions { checks: Checks::ALL, ..RunOptions::new(30) }, |_, c| later = c.clone()).unwrap();
    let dir = std::env::temp_dir();
    for (name, grid) in [("and-0.ppm", &start), ("and-30.ppm", &later)] {
        let path = dir.join(name);
        std::fs::write(&path, render_ppm(grid, frame, &RenderSpec::with_cell_size(8)).unwrap()).unwrap();
        println!("wrote {}", path.display());
    }
}
