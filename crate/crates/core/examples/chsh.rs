//! CHSH correlations of the singlet, the classical bound from the assignment
//! polytope, and the linear program deciding whether an h.v. model exists.
//!
//! ```bash
//! cargo run --example chsh
//! ```

use nogo_lab::feasibility::{
    bch_holds, chsh_scenario, chsh_value, classical_chsh_bound, hv_feasibility, singlet, ChshSettings,
    FeasibilityOptions,
};
use nogo_lab::quantum::Density;
use nogo_lab::{CMat, Tolerances};

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let opts = FeasibilityOptions::default();
    let product = Density::new(CMat::diag(&[0.5, 0.0, 0.0, 0.5]), t)?;

    for (name, state) in [("singlet", singlet()), ("classically correlated", product)] {
        for angles in [[0.0, 90.0, 45.0, 135.0], [0.0, 90.0, 30.0, 150.0]] {
            let settings = ChshSettings::from_angles(angles);
            let v = chsh_value(&state, &settings, t)?;
            let s = chsh_scenario(&settings, Some(state.clone()), t)?;
            let r = hv_feasibility(&s, opts)?;
            println!("{name} at {angles:?}: S = {:+.6}, BCH holds {}, {:?}", v.s, bch_holds(v.correlators), r.status);
            if let Some(c) = &r.violated {
                println!("  violated: {}  (quantum side {:.6})", c.expression(), c.quantum);
            }
            if r.certificate_is_exact() {
                let support = r.certificate.iter().flatten().filter(|w| !num::Zero::is_zero(*w)).count();
                println!("  exact certificate on {support} of {} assignments", r.assignments.len());
            }
        }
    }
    let s = chsh_scenario(&ChshSettings::from_angles([0.0, 90.0, 45.0, 135.0]), None, t)?;
    println!("classical bound: {}", classical_chsh_bound(&s)?);
    Ok(())
}
