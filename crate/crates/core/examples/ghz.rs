//! The three-qubit GHZ argument as a scenario: the product rules of the four
//! Mermin observables leave no admissible value assignment.
//!
//! ```bash
//! cargo run --example ghz
//! ```

use nogo_lab::feasibility::{ghz_state, hv_feasibility, FeasibilityOptions};
use nogo_lab::format::load_scenario;
use nogo_lab::Tolerances;

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ghz.scenario");
    let s = load_scenario(path.as_ref(), t)?;
    let ghz = ghz_state();
    for item in s.items() {
        println!("<{}> = {:+.3}", item.label(), ghz.expect(item.mat())?);
    }
    let r = hv_feasibility(&s, FeasibilityOptions::default())?;
    println!("{:?}", r.status);
    Ok(())
}
