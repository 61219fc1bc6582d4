//! The two-qubit magic square: nine dichotomic observables, six commuting
//! contexts, and no value assignment respecting the product rules.
//!
//! ```bash
//! cargo run --example magic_square
//! ```

use nogo_lab::feasibility::{enumerate_assignments, hv_feasibility, FeasibilityOptions};
use nogo_lab::format::load_scenario;
use nogo_lab::opcore::random::random_density;
use nogo_lab::rng::TrialRng;
use nogo_lab::Tolerances;

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/magic-square.scenario");
    let s = load_scenario(path.as_ref(), t)?;
    let labels: Vec<&str> = s.items().iter().map(|i| i.label()).collect();
    println!("items: {}", labels.join(" "));
    for p in s.products() {
        let names: Vec<&str> = p.items.iter().map(|&i| labels[i]).collect();
        println!("  {} = {:+}", names.join("·"), p.sign);
    }
    println!("admissible assignments: {}", enumerate_assignments(&s)?.len());

    let state = random_density(4, &mut TrialRng::new(0, 0));
    let r = hv_feasibility(&s.with_state(state)?, FeasibilityOptions::default())?;
    println!("random state: {:?}", r.status);
    Ok(())
}
