//! Auditing a projector family: an explicit model when everything commutes,
//! otherwise the pairs that rule out any model.
//!
//! ```bash
//! cargo run --example commutativity_audit
//! ```

use nogo_lab::nogo::hv_implies_commuting;
use nogo_lab::opcore::c;
use nogo_lab::quantum::{Density, Projector};
use nogo_lab::Tolerances;

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let d = Density::maximally_mixed(3);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut family = vec![
        ("E1".to_string(), Projector::basis(3, 0)),
        ("E2".to_string(), Projector::basis(3, 1)),
    ];

    let audit = hv_implies_commuting(&family, &d, t)?;
    let points = audit.model.as_ref().map_or(0, |m| m.space().len());
    println!("{:?}: model with {points} points", audit.report.verdict);

    family.push(("F".to_string(), Projector::ray(&[c(s, 0.0), c(s, 0.0), c(0.0, 0.0)])?));
    let audit = hv_implies_commuting(&family, &d, t)?;
    println!("{:?}", audit.report.verdict);
    for o in &audit.obstructions {
        println!("  ({}, {}): ||[A,B]|| = {:.6}, gap = {:.6}", o.a, o.b, o.commutator, o.symmetry.gap);
    }
    Ok(())
}
