//! A joint-eigenbasis h.v. model for a commuting family, the full battery of
//! axiom checks on it, and what happens when one weight is corrupted.
//!
//! ```bash
//! cargo run --example commuting_model
//! ```

use nogo_lab::format::load_model;
use nogo_lab::hvmodel::{build_commuting_model, check_all, PhaseSpace};
use nogo_lab::quantum::{Density, Observable};
use nogo_lab::{CMat, Tolerances};

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let a = CMat::diag(&[1.0, 0.0, 0.0, -1.0]);
    let b = CMat::diag(&[1.0, 1.0, 0.0, 0.0]);
    let family = vec![
        ("A".to_string(), Observable::new(a.clone(), t)?),
        ("B".to_string(), Observable::new(b.clone(), t)?),
        ("A+B".to_string(), Observable::new(&a + &b, t)?),
        ("AB".to_string(), Observable::new(&a * &b, t)?),
    ];
    let d = Density::new(CMat::diag(&[0.4, 0.3, 0.2, 0.1]), t)?;
    let m = build_commuting_model(family, &d, t)?;
    let reports = check_all(&m, t);
    println!("{} points, {} checks, all pass: {}", m.space().len(), reports.len(), reports.iter().all(|r| r.passed));

    let mut w = m.space().weights().to_vec();
    w[0] += 0.1;
    w[1] -= 0.1;
    let bad = m.with_space(PhaseSpace::unchecked(m.space().points().to_vec(), w)?);
    for r in check_all(&bad, t).iter().filter(|r| !r.passed).take(5) {
        println!("  {} {}: {}", r.rule.anchor(), r.subject, r.flagged.join("; "));
    }

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/commuting.model");
    let shipped = load_model(path.as_ref(), t)?;
    println!("shipped model passes: {}", check_all(&shipped, t).iter().all(|r| r.passed));
    Ok(())
}
