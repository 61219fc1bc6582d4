//! Building a scenario in code: three orthogonal rays resolving the identity,
//! an exact certificate for a diagonal state, and one for a coherent state.
//!
//! ```bash
//! cargo run --example contextual_feasibility
//! ```

use nogo_lab::feasibility::{hv_feasibility, ContextSpec, FeasibilityOptions, ItemKind, ItemSpec, Scenario};
use nogo_lab::opcore::c;
use nogo_lab::quantum::Density;
use nogo_lab::{CMat, Tolerances};

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let items = (0..3)
        .map(|k| ItemSpec { label: format!("P{}", k + 1), kind: ItemKind::Projector, mat: CMat::basis_projector(3, k) })
        .collect();
    let context = ContextSpec { labels: vec!["P1".into(), "P2".into(), "P3".into()], resolves_identity: true };
    let s = Scenario::new(3, items, vec![context], vec![], None, None, t)?;

    let third = 1.0 / 3f64.sqrt();
    for (name, d) in [
        ("diagonal", Density::new(CMat::diag(&[0.5, 0.3, 0.2]), t)?),
        ("coherent", Density::pure(&[c(third, 0.0), c(0.0, third), c(-third, 0.0)])?),
    ] {
        let r = hv_feasibility(&s.with_state(d)?, FeasibilityOptions::default())?;
        println!("{name}: {:?}", r.status);
        for (a, w) in r.assignments.iter().zip(r.certificate.iter().flatten()) {
            println!("  {:?} with weight {w}", a.values());
        }
    }
    Ok(())
}
