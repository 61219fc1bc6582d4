//! The trace-symmetry gap `‖BAB − ABA‖` and a density that attains it, for
//! projector pairs rotated away from each other.
//!
//! ```bash
//! cargo run --example symmetry_witness
//! ```

use nogo_lab::nogo::trace_symmetry_gap;
use nogo_lab::opcore::c;
use nogo_lab::quantum::Projector;
use nogo_lab::Tolerances;

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let a = Projector::basis(3, 0);
    println!("{:>8} {:>12} {:>12} {:>12}", "angle", "||[A,B]||", "gap", "attained");
    for deg in [0.0_f64, 10.0, 30.0, 45.0, 60.0, 90.0] {
        let (s, co) = deg.to_radians().sin_cos();
        let b = Projector::ray(&[c(co, 0.0), c(s, 0.0), c(0.0, 0.0)])?;
        let comm = a.mat().commutator(b.mat()).op_norm();
        let g = trace_symmetry_gap(&a, &b, t)?;
        println!("{deg:>8.1} {comm:>12.6} {:>12.6} {:>12.6}", g.gap, g.achieved);
    }
    Ok(())
}
