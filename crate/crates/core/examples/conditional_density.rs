//! The Lüders state `D_B = BDB / tr[DB]` as the unique density supported on
//! `range(B)` that reproduces `D` there, checked against random competitors.
//!
//! ```bash
//! cargo run --example conditional_density
//! ```

use nogo_lab::nogo::{check_exercise_uniqueness, uniqueness_discriminator};
use nogo_lab::opcore::random::{random_density, random_density_within, random_projector};
use nogo_lab::quantum::{luders_density, Density};
use nogo_lab::rng::TrialRng;
use nogo_lab::Tolerances;

fn main() -> nogo_lab::Result<()> {
    let t = Tolerances::default();
    let mut rng = TrialRng::new(1, 0);
    let d = random_density(4, &mut rng);
    let b = random_projector(4, 2, &mut rng);

    let report = check_exercise_uniqueness(&d, &b, 50, &mut rng, t)?;
    println!("{:?}", report.verdict);
    for s in &report.steps {
        println!("  {:<60} {:.3e}", s.description, s.residual);
    }
    for n in &report.notes {
        println!("  note: {n}");
    }

    // a competitor close to D_B is still told apart by a subprojector of B
    let d_b = luders_density(&d, &b, t)?;
    let other = random_density_within(&b, &mut rng);
    let eps = 1e-5;
    let d_prime = Density::new(d_b.mat().scale(1.0 - eps) + other.mat().scale(eps), t)?;
    let disc = uniqueness_discriminator(&d_b, &d_prime, &b, t)?;
    println!(
        "distance {:.3e}, |tr[D'R] - tr[D_B R]| = {:.3e}, R <= B residual {:.1e}",
        disc.distance, disc.gap, disc.order_residual
    );
    Ok(())
}
