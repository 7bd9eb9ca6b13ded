//! The widget catalog, checked by simulation.

use rnca::canonical_rule;
use rnca::widgets::{green_wire, measure_speed, red_wire, validate_widget, Catalog};

fn main() {
    let rule = canonical_rule(1, 0).unwrap();
    for w in Catalog::standard().widgets() {
        println!("{}\n", validate_widget(&rule, w, 200).unwrap());
    }
    println!("{}\n", validate_widget(&rule, &red_wire(8), 100).unwrap());
    let red = measure_speed(&rule, red_wire, &[8, 16, 24]).unwrap();
    let green = measure_speed(&rule, green_wire, &[8, 16, 24]).unwrap();
    println!("red wire speed {red}, green segment speed {green}");
}
