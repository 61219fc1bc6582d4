//! Both proof routes from `tr[DBAB] = tr[DABA]` to `AB = BA`, run on one
//! commuting and one noncommuting pair of projectors.
//!
//! ```bash
//! cargo run --example commutativity_theorem
//! ```

use nogo_lab::nogo::{check_alt_proof, check_theorem2_chain, TheoremReport};
use nogo_lab::opcore::c;
use nogo_lab::quantum::Projector;
use nogo_lab::Tolerances;

fn show(label: &str, r: &TheoremReport) {
    println!("{label}: {} -> {:?}", r.name, r.verdict);
    for s in &r.steps {
        let mark = if s.passed { "ok " } else { "!! " };
        println!("  {mark}{:<12?} {:<44} {:.3e} (<= {:.1e})", s.kind, s.description, s.residual, s.threshold);
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let p1 = Projector::basis(3, 0);
    let p12 = Projector::new(Projector::basis(3, 0).mat() + Projector::basis(3, 1).mat(), t)?;

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = Projector::ray(&[c(s, 0.0), c(s, 0.0), c(0.0, 0.0)])?;

    show("commuting", &check_theorem2_chain(&p1, &p12, t)?);
    show("commuting", &check_alt_proof(&p1, &p12, t)?);

    let chain = check_theorem2_chain(&p1, &plus, t)?;
    show("noncommuting", &chain);
    show("noncommuting", &check_alt_proof(&p1, &plus, t)?);
    if let Some(w) = &chain.witness {
        println!("witness density:{}", w.mat().as_matrix());
    }
    Ok(())
}
